#include "bayeswarp/diagnostics.hpp"

#include <algorithm>
#include <limits>

namespace bayeswarp {

double effective_sample_size(const Eigen::VectorXd& x) {
  const Eigen::Index n = x.size();
  if (n < 4) return static_cast<double>(n);
  const Eigen::VectorXd d = x.array() - x.mean();
  const double c0 = d.squaredNorm() / static_cast<double>(n);
  if (!(c0 > 0.0)) return 1.0;

  auto rho = [&](Eigen::Index lag) {
    const double c = d.head(n - lag).dot(d.tail(n - lag)) / static_cast<double>(n);
    return c / c0;
  };
  double tau = -1.0;
  double previous = std::numeric_limits<double>::infinity();
  for (Eigen::Index m = 0; 2 * m + 1 < n; ++m) {
    double pair = rho(2 * m) + rho(2 * m + 1);
    if (!(pair > 0.0)) break;
    pair = std::min(pair, previous);
    previous = pair;
    tau += 2.0 * pair;
  }
  tau = std::max(tau, 1.0 / static_cast<double>(n));
  return std::min(static_cast<double>(n) / tau, static_cast<double>(n));
}

}  // namespace bayeswarp
