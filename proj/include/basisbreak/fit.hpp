#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace bb {

struct PolyFit {
  std::vector<double> coeffs;  // c0 + c1 x + c2 x^2 + ...
  double r2 = 0.0;

  double operator()(double x) const;
};

// Ordinary least squares on the Vandermonde system. Throws ConfigError when
// there are fewer points than coefficients.
PolyFit fit_polynomial(std::span<const double> x, std::span<const double> y,
                       std::size_t degree);

bool strictly_increasing(std::span<const double> y);
bool non_increasing(std::span<const double> y);

}  // namespace bb
