#include <doctest.h>

#include <cmath>

#include "xrkhs/kernels.hpp"
#include "xrkhs/rng.hpp"

using namespace xrkhs;

namespace {
constexpr double kPi = 3.14159265358979323846;
constexpr double kSqrtPi = 1.7724538509055160273;

Eigen::VectorXd vec1(double x) {
  Eigen::VectorXd v(1);
  v << x;
  return v;
}

double gl_integral(const QuadratureRule& rule, double lo, double hi,
                   const std::function<double(double)>& f) {
  const double mid = (lo + hi) / 2, half = (hi - lo) / 2;
  double acc = 0.0;
  for (size_t k = 0; k < rule.nodes.size(); ++k) {
    acc += rule.weights[k] * f(mid + half * rule.nodes[k]);
  }
  return acc * half;
}

}  // namespace

TEST_CASE("quadrature rule integrates constants exactly") {
  for (int order : {1, 8, 64, 128}) {
    const QuadratureRule rule = QuadratureRule::gauss_legendre(order);
    double sum = 0;
    for (double w : rule.weights) sum += w;
    CHECK(std::abs(sum - 2.0) < 1e-12);
  }
}

TEST_CASE("error function basics") {
  CHECK(error_function(0.0) == 0.0);
  SplitMix64 rng(21);
  for (int k = 0; k < 50; ++k) {
    const double z = 6.0 * (rng.next_uniform() - 0.5);
    CHECK(error_function(-z) == doctest::Approx(-error_function(z)).epsilon(1e-15));
    CHECK(std::abs(error_function(z)) <= 1.0);
  }
  // quadrature of the defining integral
  const QuadratureRule rule = QuadratureRule::gauss_legendre(64);
  const double by_quadrature =
      2.0 / kSqrtPi *
      gl_integral(rule, 0.0, 1.0, [](double t) { return std::exp(-t * t); });
  CHECK(std::abs(error_function(1.0) - by_quadrature) < 1e-13);
  CHECK(std::abs(error_function(1.0) - 0.842700792949715) < 1e-12);
}

TEST_CASE("phi antiderivative") {
  CHECK(phi_antiderivative(0.0) == 0.0);
  SplitMix64 rng(22);
  for (int k = 0; k < 50; ++k) {
    const double z = 5.0 * (rng.next_uniform() - 0.5);
    CHECK(phi_antiderivative(-z) ==
          doctest::Approx(phi_antiderivative(z)).epsilon(1e-14));
    CHECK(phi_antiderivative(z) >= -1e-15);
  }
  const QuadratureRule rule = QuadratureRule::gauss_legendre(64);
  const double by_quadrature =
      kSqrtPi *
      gl_integral(rule, 0.0, 2.0, [](double t) { return error_function(t); });
  CHECK(std::abs(phi_antiderivative(2.0) - by_quadrature) < 1e-10);
}

namespace {
// 1-D reduction of the rectangle probability: P(Z1<=a, Z2<=b) =
// Integral_{-inf}^{a} pdf(x) Phi((b - rho x)/sqrt(1-rho^2)) dx.
double bvn_oracle(double a, double b, double rho) {
  const QuadratureRule rule = QuadratureRule::gauss_legendre(400);
  const double s = std::sqrt(1.0 - rho * rho);
  return gl_integral(rule, -9.0, a, [&](double x) {
    return std::exp(-x * x / 2) / std::sqrt(2 * kPi) *
           normal_cdf((b - rho * x) / s);
  });
}
}  // namespace

TEST_CASE("bivariate normal cdf") {
  SplitMix64 rng(23);
  // independence
  for (int k = 0; k < 20; ++k) {
    const double a = 4.0 * (rng.next_uniform() - 0.5);
    const double b = 4.0 * (rng.next_uniform() - 0.5);
    CHECK(std::abs(bivariate_normal_cdf(a, b, 0.0) -
                   normal_cdf(a) * normal_cdf(b)) < 1e-12);
  }
  // full mass
  for (double rho : {-0.9, -0.3, 0.0, 0.5, 0.95}) {
    CHECK(std::abs(bivariate_normal_cdf(8.0, 8.0, rho) - 1.0) < 1e-12);
  }
  // closed form at the origin: 1/4 + asin(rho) / (2 pi)
  CHECK(std::abs(bivariate_normal_cdf(0.0, 0.0, 0.5) - 1.0 / 3.0) < 1e-13);
  CHECK(std::abs(bivariate_normal_cdf(0.0, 0.0, 0.5) - bvn_oracle(0, 0, 0.5)) <
        1e-10);
  // against the 1-D reduction oracle across the range
  for (int k = 0; k < 25; ++k) {
    const double a = 5.0 * (rng.next_uniform() - 0.5);
    const double b = 5.0 * (rng.next_uniform() - 0.5);
    const double rho = 1.96 * (rng.next_uniform() - 0.5);
    CHECK(std::abs(bivariate_normal_cdf(a, b, rho) - bvn_oracle(a, b, rho)) <
          1e-10);
  }
  // monotone in both arguments
  for (int k = 0; k < 20; ++k) {
    const double a = 3.0 * (rng.next_uniform() - 0.5);
    const double b = 3.0 * (rng.next_uniform() - 0.5);
    const double rho = 1.8 * (rng.next_uniform() - 0.5);
    CHECK(bivariate_normal_cdf(a + 0.1, b, rho) >=
          bivariate_normal_cdf(a, b, rho) - 1e-14);
    CHECK(bivariate_normal_cdf(a, b + 0.1, rho) >=
          bivariate_normal_cdf(a, b, rho) - 1e-14);
  }
  CHECK_THROWS_AS(bivariate_normal_cdf(0, 0, 1.0 - 1e-12), std::invalid_argument);
  CHECK_THROWS_AS(bivariate_normal_cdf(0, 0, 1.5), std::invalid_argument);
}

TEST_CASE("induced kernel vanishes on the boundary and is symmetric") {
  const GaussianKernelParams p{4.0, 2};
  CHECK(induced_kernel(p, 1.0, 0.3) == 0.0);
  CHECK(induced_kernel(p, -1.0, 0.0) == 0.0);
  SplitMix64 rng(24);
  for (int k = 0; k < 50; ++k) {
    const double x1 = 2.0 * rng.next_uniform() - 1.0;
    const double x2 = 2.0 * rng.next_uniform() - 1.0;
    CHECK(induced_kernel(p, x1, x2) ==
          doctest::Approx(induced_kernel(p, x2, x1)).epsilon(1e-14));
  }
  CHECK_THROWS_AS(induced_kernel(p, 1.2, 0.0), std::invalid_argument);
}

TEST_CASE("induced kernel at the origin matches the double quadrature") {
  const GaussianKernelParams p{1.0, 2};
  const double oracle = quadrature_gram_oracle(
      gaussian_kernel_fn(1.0), Orientation::identity(2), Orientation::identity(2),
      vec1(0.0), vec1(0.0), QuadratureRule::gauss_legendre(64));
  CHECK(std::abs(induced_kernel(p, 0.0, 0.0) - oracle) < 1e-8);
}

TEST_CASE("induced kernel sample matrix is positive semidefinite") {
  SplitMix64 rng(25);
  const GaussianKernelParams p{8.0, 2};
  Eigen::MatrixXd K(10, 10);
  std::vector<double> pts(10);
  for (auto& x : pts) x = 1.9 * (rng.next_uniform() - 0.5);
  for (int i = 0; i < 10; ++i) {
    for (int j = 0; j < 10; ++j) K(i, j) = induced_kernel(p, pts[i], pts[j]);
  }
  const Eigen::VectorXd evals =
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(K).eigenvalues();
  CHECK(evals.minCoeff() >= -1e-10);
}

TEST_CASE("backprojected generator") {
  SplitMix64 rng(26);
  const QuadratureRule rule = QuadratureRule::gauss_legendre(96);

  // vanishes when the mesh point sits on the boundary sphere
  Eigen::VectorXd z0(2);
  z0 << 0.1, 0.2;
  CHECK(backprojected_generator({4.0, 2}, Orientation::from_angle(0.3), vec1(1.0),
                                z0) == 0.0);

  // matches the single-integral quadrature for random inputs
  for (int rep = 0; rep < 30; ++rep) {
    const int n = rep % 2 == 0 ? 2 : 3;
    const double gamma = rep % 3 == 0 ? 16.0 : 1.0;
    const Orientation R = random_orientation(n, rng);
    Eigen::VectorXd x(n - 1), z(n);
    for (int k = 0; k < n - 1; ++k) x(k) = rng.next_normal();
    for (int k = 0; k < n; ++k) z(k) = rng.next_normal();
    x *= 0.98 * rng.next_uniform() / x.norm();
    z *= 0.99 * rng.next_uniform() / z.norm();
    const double Wx = chord_half_point(x);
    const Eigen::MatrixXd Rt = R.matrix().transpose();
    double oracle = 0.0;
    for (size_t q = 0; q < rule.nodes.size(); ++q) {
      Eigen::VectorXd pt(n);
      pt.head(n - 1) = x;
      pt(n - 1) = Wx * rule.nodes[q];
      oracle += rule.weights[q] * Wx *
                std::exp(-gamma * (z - Rt * pt).squaredNorm());
    }
    CHECK(std::abs(backprojected_generator({gamma, n}, R, x, z) - oracle) < 1e-8);
  }

  // value depends only on (P_R z, z . r): rebuild the same pair under a
  // different orientation
  for (int rep = 0; rep < 20; ++rep) {
    const Orientation R1 = random_orientation(3, rng);
    const Orientation R2 = random_orientation(3, rng);
    Eigen::VectorXd x(2), z(3);
    x << 0.4, -0.1;
    for (int k = 0; k < 3; ++k) z(k) = rng.next_normal();
    z *= 0.9 * rng.next_uniform() / z.norm();
    const Eigen::VectorXd rz = R1.matrix() * z;
    const Eigen::VectorXd z_alt = R2.matrix().transpose() * rz;
    CHECK(backprojected_generator({4.0, 3}, R1, x, z) ==
          doctest::Approx(backprojected_generator({4.0, 3}, R2, x, z_alt))
              .epsilon(1e-13));
  }

  // planar fast path agrees with the general formula
  for (int rep = 0; rep < 20; ++rep) {
    const double phi = rng.next_uniform() * 2 * kPi;
    const double xj = 1.8 * (rng.next_uniform() - 0.5);
    Eigen::VectorXd z(2);
    z(0) = rng.next_normal();
    z(1) = rng.next_normal();
    z *= 0.95 * rng.next_uniform() / z.norm();
    const double fast = backprojected_generator(64.0, phi, xj, z(0), z(1));
    const double general = backprojected_generator(
        {64.0, 2}, Orientation::from_angle(phi), vec1(xj), z);
    CHECK(std::abs(fast - general) < 1e-12);
  }

  CHECK_THROWS_AS(backprojected_generator({1.0, 2}, Orientation::from_angle(0),
                                          vec1(0.5), 6.0 * z0),
                  std::invalid_argument);
}

namespace {
double converged_oracle(double gamma, const Orientation& R1, const Orientation& R2,
                        const Eigen::VectorXd& x1, const Eigen::VectorXd& x2) {
  double prev = quadrature_gram_oracle(gaussian_kernel_fn(gamma), R1, R2, x1, x2,
                                       QuadratureRule::gauss_legendre(64));
  for (int order = 128; order <= 4096; order *= 2) {
    const double cur =
        quadrature_gram_oracle(gaussian_kernel_fn(gamma), R1, R2, x1, x2,
                               QuadratureRule::gauss_legendre(order));
    if (std::abs(cur - prev) <= 1e-10) return cur;
    prev = cur;
  }
  FAIL("quadrature oracle did not converge");
  return prev;
}
}  // namespace

TEST_CASE("cross gram entry equals the induced kernel at equal orientations") {
  SplitMix64 rng(27);
  const GaussianKernelParams p2{8.0, 2};
  for (int rep = 0; rep < 20; ++rep) {
    const double phi = rng.next_uniform() * 2 * kPi;
    const double x1 = 1.8 * (rng.next_uniform() - 0.5);
    const double x2 = 1.8 * (rng.next_uniform() - 0.5);
    const RelativeAngleData rad = relative_angle_data(phi, phi, x1, x2);
    CHECK(cross_gram_entry(p2, rad, x1, x2) ==
          doctest::Approx(induced_kernel(p2, x1, x2)).epsilon(1e-13));
  }
  const GaussianKernelParams p3{2.0, 3};
  for (int rep = 0; rep < 10; ++rep) {
    const Orientation R = random_orientation(3, rng);
    Eigen::VectorXd x1(2), x2(2);
    x1 << 0.3, 0.2;
    x2 << -0.4, 0.25;
    const RelativeAngleData rad = relative_angle_data(R, R, x1, x2);
    CHECK(cross_gram_entry(p3, rad, x1, x2) ==
          doctest::Approx(induced_kernel(p3, x1, x2)).epsilon(1e-12));
  }
}

TEST_CASE("cross gram entry vanishes for boundary mesh points") {
  const RelativeAngleData rad = relative_angle_data(0.9, 0.1, 1.0, 0.3);
  CHECK(cross_gram_entry({4.0, 2}, rad, 1.0, 0.3) == 0.0);
}

TEST_CASE("cross gram entry matches the quadrature oracle (planar)") {
  SplitMix64 rng(28);
  for (const double gamma : {1.0, 32.0, 2048.0}) {
    for (int rep = 0; rep < 6; ++rep) {
      const double phi1 = rng.next_uniform() * 2 * kPi;
      const double phi2 = rng.next_uniform() * 2 * kPi;
      const double x1 = 1.9 * (rng.next_uniform() - 0.5);
      const double x2 = 1.9 * (rng.next_uniform() - 0.5);
      const RelativeAngleData rad = relative_angle_data(phi1, phi2, x1, x2);
      const double closed = cross_gram_entry({gamma, 2}, rad, x1, x2);
      const double oracle =
          converged_oracle(gamma, Orientation::from_angle(phi1),
                           Orientation::from_angle(phi2), vec1(x1), vec1(x2));
      CHECK(std::abs(closed - oracle) < 1e-6);
    }
  }
}

TEST_CASE("cross gram entry is continuous across the parallel cutover") {
  // just above the branch switch the bivariate form must sit within 1e-5 of
  // the parallel formula it hands over to
  const double w_target = 2e-4;
  const double dphi = std::asin(w_target);
  for (const double gamma : {1.0, 32.0}) {
    RelativeAngleData rad = relative_angle_data(dphi, 0.0, 0.3, -0.2);
    CHECK(!rad.parallel);
    const double nonparallel = cross_gram_entry({gamma, 2}, rad, 0.3, -0.2);
    rad.parallel = true;
    const double parallel = cross_gram_entry({gamma, 2}, rad, 0.3, -0.2);
    CHECK(std::abs(nonparallel - parallel) < 1e-5);
  }
}

TEST_CASE("quadrature oracle on degenerate kernels") {
  const QuadratureRule rule = QuadratureRule::gauss_legendre(32);
  const Orientation I2 = Orientation::identity(2);
  const auto zero_kernel = [](const Eigen::VectorXd&, const Eigen::VectorXd&) {
    return 0.0;
  };
  const auto one_kernel = [](const Eigen::VectorXd&, const Eigen::VectorXd&) {
    return 1.0;
  };
  CHECK(quadrature_gram_oracle(zero_kernel, I2, I2, vec1(0.2), vec1(0.5), rule) ==
        0.0);
  const double x1 = 0.2, x2 = 0.5;
  CHECK(quadrature_gram_oracle(one_kernel, I2, I2, vec1(x1), vec1(x2), rule) ==
        doctest::Approx(4.0 * chord_half(x1) * chord_half(x2)).epsilon(1e-13));
}
