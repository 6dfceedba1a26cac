#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <vector>

namespace nlfpe {

enum class BoundaryKind { absorbing, natural };

/// Uniform grid x_j = j h.
///
/// Absorbing: domain (-1, 1), h = 1/J, node range [-2J, 2J]; the unknowns are
/// the interior nodes |j| < J and the density is zero at and beyond |x| = 1.
/// Natural: half-width L, J = L/h, node range [-J, J]; every node is an
/// unknown and the far field beyond +-L is zero.
class Grid1D {
 public:
  static Grid1D absorbing(int J);
  static Grid1D natural(double half_width, double h);

  BoundaryKind kind() const { return kind_; }
  double h() const { return h_; }
  int J() const { return J_; }
  double half_width() const { return J_ * h_; }
  int j_min() const { return kind_ == BoundaryKind::absorbing ? -2 * J_ : -J_; }
  int j_max() const { return -j_min(); }
  std::size_t size() const { return static_cast<std::size_t>(j_max() - j_min() + 1); }
  double x(int j) const { return j * h_; }
  std::size_t index(int j) const { return static_cast<std::size_t>(j - j_min()); }

  int first_unknown() const { return kind_ == BoundaryKind::absorbing ? -J_ + 1 : -J_; }
  int last_unknown() const { return -first_unknown(); }
  std::size_t unknown_count() const {
    return static_cast<std::size_t>(last_unknown() - first_unknown() + 1);
  }
  std::size_t unknown_offset() const { return index(first_unknown()); }
  bool is_unknown(int j) const { return j >= first_unknown() && j <= last_unknown(); }

  std::vector<double> nodes() const;

  bool operator==(const Grid1D&) const = default;

 private:
  Grid1D(BoundaryKind kind, int J, double h) : kind_(kind), J_(J), h_(h) {}
  BoundaryKind kind_;
  int J_;
  double h_;
};

enum class Representation { p, u };

/// Grid values of p (density) or u = |sigma|^alpha p, indexed by Grid1D::index.
struct DensityState {
  Eigen::VectorXd values;
  Representation representation = Representation::p;
  double time = 0.0;
};

/// Node-wise values of fn on the grid, as a p-state at time t.
template <class Fn>
DensityState sample_density(const Grid1D& grid, Fn&& fn, double t = 0.0) {
  DensityState s;
  s.values.resize(static_cast<Eigen::Index>(grid.size()));
  for (int j = grid.j_min(); j <= grid.j_max(); ++j) {
    double v = fn(grid.x(j));
    if (grid.kind() == BoundaryKind::absorbing && !grid.is_unknown(j)) v = 0.0;
    s.values[static_cast<Eigen::Index>(grid.index(j))] = v;
  }
  s.time = t;
  return s;
}

/// sqrt(k / pi) exp(-k x^2); k = 40 is the narrow initial density of the
/// worked examples, used in place of a Dirac mass.
double gaussian_initial_density(double x, double k = 40.0);

/// Trapezoidal integral h * sum of values with halved end nodes.
double trapezoid_mass(const Grid1D& grid, const Eigen::VectorXd& values);

}  // namespace nlfpe
