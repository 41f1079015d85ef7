#pragma once

#include <Eigen/Core>

#include <cstddef>
#include <memory>
#include <vector>

namespace bayeswarp {

/// Sample points t_1 < ... < t_N on [0, 1] with t_1 = 0 and t_N = 1 exactly.
/// Copies share the underlying point storage.
class Grid {
 public:
  static Grid uniform(std::size_t n);

  explicit Grid(std::vector<double> points);

  std::size_t size() const { return static_cast<std::size_t>(points_->size()); }
  double operator[](std::size_t i) const { return (*points_)[static_cast<Eigen::Index>(i)]; }
  const Eigen::VectorXd& points() const { return *points_; }
  bool is_uniform() const { return uniform_; }

  bool operator==(const Grid& other) const;
  bool operator!=(const Grid& other) const { return !(*this == other); }

 private:
  Grid(std::shared_ptr<const Eigen::VectorXd> points, bool uniform);

  std::shared_ptr<const Eigen::VectorXd> points_;
  bool uniform_ = false;
};

namespace detail {
struct SampledTag {
  static void check(const Grid& grid, Eigen::VectorXd& values);
};
struct SrvfTag {
  static void check(const Grid& grid, Eigen::VectorXd& values);
};
struct WarpingTag {
  static void check(const Grid& grid, Eigen::VectorXd& values);
};
struct PsiTag {
  static void check(const Grid& grid, Eigen::VectorXd& values);
};
struct TangentTag {
  static void check(const Grid& grid, Eigen::VectorXd& values);
};
}  // namespace detail

/// Values on a Grid. The tag selects the invariants checked at construction,
/// so a Warping can never be passed where an Srvf is expected.
template <class Tag>
class GridFunction {
 public:
  GridFunction(Grid grid, Eigen::VectorXd values) : grid_(std::move(grid)), values_(std::move(values)) {
    Tag::check(grid_, values_);
  }

  const Grid& grid() const { return grid_; }
  const Eigen::VectorXd& values() const { return values_; }
  std::size_t size() const { return grid_.size(); }
  double operator[](std::size_t i) const { return values_[static_cast<Eigen::Index>(i)]; }

 private:
  Grid grid_;
  Eigen::VectorXd values_;
};

/// A real function observed on a grid (f, y).
using SampledFunction = GridFunction<detail::SampledTag>;
/// Square-root velocity representation q = sign(f') sqrt(|f'|).
using Srvf = GridFunction<detail::SrvfTag>;
/// Boundary-preserving nondecreasing map of [0, 1]. Endpoints within 1e-12 of
/// 0 and 1 are snapped to the exact values.
using Warping = GridFunction<detail::WarpingTag>;
/// Point on the unit Hilbert sphere (||psi|| = 1 within 1e-8).
using Psi = GridFunction<detail::PsiTag>;
/// Element of the tangent space at psi = 1 (zero mean within 1e-8).
using TangentFunction = GridFunction<detail::TangentTag>;

Warping identity_warping(const Grid& grid);

}  // namespace bayeswarp
