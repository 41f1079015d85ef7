#pragma once

#include <Eigen/Core>

namespace bayeswarp {

/// Effective sample size from Geyer's initial monotone sequence of paired
/// autocorrelations. A constant series reports 1; the result is capped at
/// the series length.
double effective_sample_size(const Eigen::VectorXd& x);

}  // namespace bayeswarp
