#include "nlfpe/grid.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

#include "nlfpe/errors.hpp"

namespace nlfpe {

Grid1D Grid1D::absorbing(int J) {
  if (J < 1) throw DomainError("Grid1D::absorbing: J must be a positive integer");
  return Grid1D(BoundaryKind::absorbing, J, 1.0 / J);
}

Grid1D Grid1D::natural(double half_width, double h) {
  if (!(h > 0.0) || !(half_width > 0.0)) {
    throw DomainError("Grid1D::natural: half-width and spacing must be positive");
  }
  const double ratio = half_width / h;
  const double rounded = std::round(ratio);
  if (rounded < 1.0 || std::abs(ratio - rounded) > 1e-9 * std::max(1.0, ratio)) {
    throw DomainError("Grid1D::natural: half-width / h must be a positive integer, got " +
                      std::to_string(ratio));
  }
  return Grid1D(BoundaryKind::natural, static_cast<int>(rounded), h);
}

std::vector<double> Grid1D::nodes() const {
  std::vector<double> out;
  out.reserve(size());
  for (int j = j_min(); j <= j_max(); ++j) out.push_back(x(j));
  return out;
}

double gaussian_initial_density(double x, double k) {
  return std::sqrt(k / std::numbers::pi) * std::exp(-k * x * x);
}

double trapezoid_mass(const Grid1D& grid, const Eigen::VectorXd& values) {
  if (values.size() == 0) return 0.0;
  const auto n = values.size();
  double sum = values.sum() - 0.5 * (values[0] + values[n - 1]);
  return grid.h() * sum;
}

}  // namespace nlfpe
