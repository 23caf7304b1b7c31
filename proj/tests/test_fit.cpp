#include <gtest/gtest.h>

#include <vector>

#include "basisbreak/errors.hpp"
#include "basisbreak/fit.hpp"

namespace bb {
namespace {

TEST(Fit, RecoversExactQuadratic) {
  const std::vector<double> x = {64, 128, 256, 512, 1024};
  std::vector<double> y;
  for (double v : x) y.push_back(3.0 + 0.5 * v + 0.01 * v * v);
  const PolyFit f = fit_polynomial(x, y, 2);
  EXPECT_NEAR(f.coeffs[0], 3.0, 1e-6);
  EXPECT_NEAR(f.coeffs[1], 0.5, 1e-8);
  EXPECT_NEAR(f.coeffs[2], 0.01, 1e-10);
  EXPECT_NEAR(f.r2, 1.0, 1e-12);
  EXPECT_NEAR(f(300), 3.0 + 150 + 900, 1e-6);
}

TEST(Fit, RSquaredAgainstHandComputation) {
  const std::vector<double> x = {1, 2, 3, 4};
  const std::vector<double> y = {1, 3, 2, 4};
  // OLS line: slope 0.8, intercept 0.5; SS_res = 1.8, SS_tot = 5.
  const PolyFit f = fit_polynomial(x, y, 1);
  EXPECT_NEAR(f.coeffs[1], 0.8, 1e-12);
  EXPECT_NEAR(f.coeffs[0], 0.5, 1e-12);
  EXPECT_NEAR(f.r2, 1.0 - 1.8 / 5.0, 1e-12);
}

TEST(Fit, Errors) {
  const std::vector<double> x = {1, 2};
  EXPECT_THROW(fit_polynomial(x, x, 2), ConfigError);
  const std::vector<double> y = {1};
  EXPECT_THROW(fit_polynomial(x, y, 1), DimensionMismatch);
}

TEST(Fit, Monotonicity) {
  const std::vector<double> up = {1, 2, 3};
  const std::vector<double> flat = {3, 3, 1};
  EXPECT_TRUE(strictly_increasing(up));
  EXPECT_FALSE(strictly_increasing(flat));
  EXPECT_TRUE(non_increasing(flat));
  EXPECT_FALSE(non_increasing(up));
}

}  // namespace
}  // namespace bb
