#include "basisbreak/fit.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Dense>

#include "basisbreak/errors.hpp"

namespace bb {

double PolyFit::operator()(double x) const {
  double acc = 0.0;
  for (auto it = coeffs.rbegin(); it != coeffs.rend(); ++it) acc = acc * x + *it;
  return acc;
}

PolyFit fit_polynomial(std::span<const double> x, std::span<const double> y,
                       std::size_t degree) {
  if (x.size() != y.size()) throw DimensionMismatch("fit: x and y differ in length");
  const auto n = static_cast<Eigen::Index>(x.size());
  const auto cols = static_cast<Eigen::Index>(degree + 1);
  if (n < cols) throw ConfigError("fit: fewer points than coefficients");

  // Scale x into [-1, 1] to keep the Vandermonde system conditioned.
  double scale = 0.0;
  for (double v : x) scale = std::max(scale, std::abs(v));
  if (scale == 0.0) scale = 1.0;

  Eigen::MatrixXd a(n, cols);
  Eigen::VectorXd b(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    double p = 1.0;
    for (Eigen::Index j = 0; j < cols; ++j) {
      a(i, j) = p;
      p *= x[static_cast<std::size_t>(i)] / scale;
    }
    b(i) = y[static_cast<std::size_t>(i)];
  }
  const Eigen::VectorXd c = a.colPivHouseholderQr().solve(b);

  PolyFit fit;
  fit.coeffs.resize(degree + 1);
  double s = 1.0;
  for (std::size_t j = 0; j <= degree; ++j) {
    fit.coeffs[j] = c(static_cast<Eigen::Index>(j)) / s;
    s *= scale;
  }
  const double mean = b.mean();
  const double ss_tot = (b.array() - mean).square().sum();
  const double ss_res = (a * c - b).squaredNorm();
  fit.r2 = ss_tot == 0.0 ? 1.0 : 1.0 - ss_res / ss_tot;
  return fit;
}

bool strictly_increasing(std::span<const double> y) {
  for (std::size_t i = 1; i < y.size(); ++i) {
    if (!(y[i] > y[i - 1])) return false;
  }
  return true;
}

bool non_increasing(std::span<const double> y) {
  for (std::size_t i = 1; i < y.size(); ++i) {
    if (y[i] > y[i - 1]) return false;
  }
  return true;
}

}  // namespace bb
