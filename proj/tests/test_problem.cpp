#include "mmx/instances.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace mmx;

namespace {

MinimaxProblem small_bilinear() { return default_bilinear(1.0, 1.0).problem(); }

// Central differences of a scalar function of one coordinate.
template <class F>
double central_diff(F&& f, double h) {
  return (f(h) - f(-h)) / (2.0 * h);
}

}  // namespace

TEST(Problem, ValidateRejectsUnboundedOrOriginFreeDual) {
  MinimaxProblem p = small_bilinear();
  EXPECT_NO_THROW(p.validate());
  MinimaxProblem q = p;
  q.set_y = ProjectableSet::full_space(2);
  EXPECT_THROW(q.validate(), Error);
  q = p;
  q.set_y = ProjectableSet::box(Vec::Constant(2, 0.1), Vec::Constant(2, 1.0));
  EXPECT_THROW(q.validate(), Error);
  q = p;
  q.set_x = ProjectableSet::full_space(3);
  EXPECT_THROW(q.validate(), Error);
}

TEST(Problem, SurrogateGradientsMatchFiniteDifferences) {
  const MinimaxProblem p = small_bilinear();
  const SurrogateParams s{4.0, 0.1};
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-0.4, 0.4);
  for (int k = 0; k < 50; ++k) {
    Vec x(2), y(2), z(2);
    x << u(rng), u(rng);
    y << u(rng), u(rng);
    z << u(rng), u(rng);
    const auto [gx, gy] = surrogate_grads(p, s, x, y, z);
    for (int i = 0; i < 2; ++i) {
      const double dx = central_diff(
          [&](double h) {
            Vec xx = x;
            xx[i] += h;
            return surrogate_value(p, s, xx, y, z);
          },
          1e-5);
      const double dy = central_diff(
          [&](double h) {
            Vec yy = y;
            yy[i] += h;
            return surrogate_value(p, s, x, yy, z);
          },
          1e-5);
      EXPECT_NEAR(gx[i], dx, 1e-8);
      EXPECT_NEAR(gy[i], dy, 1e-8);
    }
  }
}

TEST(Problem, PerturbedValueSubtractsDualQuadratic) {
  const MinimaxProblem p = small_bilinear();
  Vec x = Vec::Constant(2, 0.3), y = Vec::Constant(2, -0.2);
  EXPECT_DOUBLE_EQ(perturbed_value(p, 0.5, x, y), p.f(x, y) - 0.25 * 0.08);
  // Terms of size ~0.2 cancel to ~0.006, so compare at the scale of the terms.
  EXPECT_NEAR(surrogate_value(p, {2.0, 0.5}, x, y, Vec::Zero(2)), p.f(x, y) - 0.02 + 0.18, 1e-15);
}

TEST(ProblemProperty, BilinearSampledLipschitzBelowEll) {
  const MinimaxProblem p = small_bilinear();
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> ux(-2.0, 2.0), uy(-0.5, 0.5);
  auto draw = [&]() {
    Vec x(2), y(2);
    x << ux(rng), ux(rng);
    y << uy(rng), uy(rng);
    return std::pair<Vec, Vec>(x, y);
  };
  const LipschitzSample s = sampled_lipschitz(p, draw, 10000);
  EXPECT_EQ(s.pairs, 10000);
  EXPECT_LE(s.max_ratio_x, p.ell * (1 + 1e-9));
  EXPECT_LE(s.max_ratio_y, p.ell * (1 + 1e-9));
  EXPECT_LE(sampled_concavity_violation(p, draw, 2000), 1e-12);
}

TEST(Problem, CheckDimsRejectsWrongSizes) {
  const MinimaxProblem p = small_bilinear();
  EXPECT_THROW(p.check_dims(Vec::Zero(1), Vec::Zero(2)), Error);
  EXPECT_THROW(surrogate_grads(p, {1.0, 0.0}, Vec::Zero(2), Vec::Zero(2), Vec::Zero(3)), Error);
}
