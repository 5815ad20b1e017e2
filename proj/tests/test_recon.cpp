#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "xrkhs/analysis.hpp"
#include "xrkhs/rng.hpp"

using namespace xrkhs;

namespace {
constexpr double kPi = 3.14159265358979323846;

CoefficientField fitted_field(int N, int M, double gamma, double nu, double sigma,
                              std::uint64_t seed, GramMatrix* gram_out = nullptr) {
  const AngleGrid grid = make_angle_grid(GridKind::random_grid, N, 0.0, seed);
  const DetectorMesh mesh = make_mesh(M);
  const Sinogram sino = simulate_sinogram(shepp_logan(), grid, mesh, sigma, seed);
  const GramMatrix gram = assemble_dense({gamma, 2}, grid, mesh);
  if (gram_out != nullptr) *gram_out = gram;
  return solve_tikhonov(gram, sino, nu);
}
}  // namespace

TEST_CASE("zero coefficients give a zero raster") {
  CoefficientField f = fitted_field(4, 6, 8.0, 0.01, 0.0, 3);
  f.alpha.setZero();
  const ImageRaster img = evaluate_reconstruction(f, 32);
  CHECK(img.values.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("single coefficient reproduces the backprojected generator") {
  CoefficientField f = fitted_field(4, 6, 8.0, 0.01, 0.0, 5);
  f.alpha.setZero();
  f.alpha(1, 2) = 1.0;
  const ImageRaster img = evaluate_reconstruction(f, 24);
  Eigen::VectorXd xj(1);
  xj << f.mesh.offset(2);
  const Orientation R = Orientation::from_angle(f.grid.angles[1]);
  for (int row = 0; row < 24; ++row) {
    for (int col = 0; col < 24; ++col) {
      if (!img.inside(row, col)) {
        CHECK(img.values(row, col) == 0.0);
        continue;
      }
      Eigen::VectorXd z(2);
      z << img.center(col), img.center(row);
      CHECK(std::abs(img.values(row, col) -
                     backprojected_generator({8.0, 2}, R, xj, z)) < 1e-12);
    }
  }
}

TEST_CASE("pointwise bound through the coefficient norm") {
  GramMatrix gram;
  const CoefficientField f = fitted_field(6, 10, 32.0, 0.01, 2.0, 7, &gram);
  const double norm = std::sqrt(hnorm2(gram, f.vec()));
  const ImageRaster img = evaluate_reconstruction(f, 48);
  // K(z, z) = 1, so |f(z)| <= ||f||_H everywhere
  CHECK(img.values.cwiseAbs().maxCoeff() <= norm * (1.0 + 1e-10));
}

TEST_CASE("evaluation is linear in the coefficients") {
  CoefficientField f1 = fitted_field(4, 8, 16.0, 0.01, 1.0, 9);
  CoefficientField f2 = f1;
  SplitMix64 rng(10);
  for (int i = 0; i < f2.alpha.rows(); ++i) {
    for (int j = 0; j < f2.alpha.cols(); ++j) f2.alpha(i, j) = rng.next_normal();
  }
  CoefficientField mix = f1;
  mix.alpha = 0.25 * f1.alpha - 2.0 * f2.alpha;
  const ImageRaster e1 = evaluate_reconstruction(f1, 20);
  const ImageRaster e2 = evaluate_reconstruction(f2, 20);
  const ImageRaster em = evaluate_reconstruction(mix, 20);
  const double scale = em.values.cwiseAbs().maxCoeff();
  CHECK((em.values - 0.25 * e1.values + 2.0 * e2.values).cwiseAbs().maxCoeff() <=
        1e-12 * std::max(1.0, scale));
}

TEST_CASE("sinogram interpolation vanishes at the boundary") {
  const CoefficientField f = fitted_field(5, 8, 8.0, 0.01, 0.0, 11);
  CHECK(std::abs(interpolate_sinogram(f, 0.3, 1.0)) < 1e-13);
  CHECK(std::abs(interpolate_sinogram(f, 2.1, -1.0)) < 1e-13);
  CHECK_THROWS_AS(interpolate_sinogram(f, 0.0, 1.5), std::invalid_argument);
}

TEST_CASE("minimum-norm coefficients interpolate the observations exactly") {
  const int N = 5, M = 6;
  const AngleGrid grid = make_angle_grid(GridKind::random_grid, N, 0.0, 13);
  const DetectorMesh mesh = make_mesh(M);
  const Sinogram sino = simulate_sinogram(shepp_logan(), grid, mesh, 4.0, 13);
  const GramMatrix gram = assemble_dense({8.0, 2}, grid, mesh);
  const CoefficientField f = solve_mle(gram, sino);
  for (int i = 0; i < N; ++i) {
    for (int j = 0; j < M; ++j) {
      CHECK(std::abs(interpolate_sinogram(f, grid.angles[i], mesh.offset(j)) -
                     sino.values(i, j)) < 1e-6);
    }
  }
}

TEST_CASE("interpolation at a node equals the Gram row product") {
  GramMatrix gram;
  const CoefficientField f = fitted_field(5, 7, 8.0, 0.02, 1.0, 17, &gram);
  const Eigen::VectorXd wa = gram.dense * f.vec();
  for (int i = 0; i < 5; ++i) {
    for (int j = 0; j < 7; ++j) {
      CHECK(std::abs(interpolate_sinogram(f, f.grid.angles[i], f.mesh.offset(j)) -
                     wa(i * 7 + j)) < 1e-10);
    }
  }
}

TEST_CASE("interpolation matches the ray integral of the rasterized image") {
  const CoefficientField f = fitted_field(8, 20, 32.0, 0.01, 0.0, 19);
  const int P = 1200;  // bilinear raster error enters the tolerance directly
  const ImageRaster img = evaluate_reconstruction(f, P);
  const auto sample = [&](double z1, double z2) {
    if (z1 * z1 + z2 * z2 >= 1.0) return 0.0;
    const double u = (z1 + 1.0) * P / 2.0 - 0.5;
    const double v = (z2 + 1.0) * P / 2.0 - 0.5;
    const int c0 = static_cast<int>(std::floor(u));
    const int r0 = static_cast<int>(std::floor(v));
    const double fu = u - c0, fv = v - r0;
    const auto at = [&](int r, int c) {
      if (r < 0 || c < 0 || r >= P || c >= P) return 0.0;
      return img.values(r, c);
    };
    return (1 - fu) * (1 - fv) * at(r0, c0) + fu * (1 - fv) * at(r0, c0 + 1) +
           (1 - fu) * fv * at(r0 + 1, c0) + fu * fv * at(r0 + 1, c0 + 1);
  };
  SplitMix64 rng(21);
  for (int probe = 0; probe < 5; ++probe) {
    const double phi = rng.next_uniform() * kPi;
    const double x = 1.4 * (rng.next_uniform() - 0.5);
    const double W = std::sqrt(1.0 - x * x);
    const double c = std::cos(phi), s = std::sin(phi);
    const int steps = 2000;
    const double dt = 2.0 * W / steps;
    double integral = 0.0;
    for (int k = 0; k < steps; ++k) {
      const double t = -W + (k + 0.5) * dt;
      integral += sample(x * c + t * s, -x * s + t * c);
    }
    integral *= dt;
    CHECK(std::abs(integral - interpolate_sinogram(f, phi, x)) < 2e-3);
  }
}

TEST_CASE("moment check on zero coefficients passes with zero moments") {
  CoefficientField f = fitted_field(4, 6, 8.0, 0.01, 0.0, 23);
  f.alpha.setZero();
  const HlccReport rep = hlcc_moment_check(
      f, 2, {0.1, 1.0, 2.2}, QuadratureRule::gauss_legendre(48), 64);
  CHECK(rep.pass);
  for (double dev : rep.max_rel_deviation) CHECK(dev == 0.0);
}

TEST_CASE("moment check on a small reconstruction") {
  const CoefficientField f = fitted_field(10, 20, 32.0, std::ldexp(1.0, -7), 0.0, 29);
  SplitMix64 rng(31);
  std::vector<double> probes(5);
  for (double& p : probes) p = rng.next_uniform() * kPi;

  // the total sinogram mass is the same at every probe angle
  const QuadratureRule rule = QuadratureRule::gauss_legendre(96);
  double mass_lo = 1e300, mass_hi = -1e300;
  for (double phi : probes) {
    double mass = 0.0;
    for (size_t q = 0; q < rule.nodes.size(); ++q) {
      mass += rule.weights[q] * interpolate_sinogram(f, phi, rule.nodes[q]);
    }
    mass_lo = std::min(mass_lo, mass);
    mass_hi = std::max(mass_hi, mass);
  }
  CHECK((mass_hi - mass_lo) <= 1e-4 * std::abs(mass_hi));

  const HlccReport rep = hlcc_moment_check(f, 2, probes, rule, 200);
  REQUIRE(rep.max_rel_deviation.size() == 3);
  CHECK(rep.max_rel_deviation[1] <= 1e-3);
  CHECK(rep.max_rel_deviation[2] <= 1e-3);
  CHECK(rep.pass);
  CHECK_THROWS_AS(hlcc_moment_check(f, 5, probes,
                                    QuadratureRule::gauss_legendre(16), 32),
                  std::invalid_argument);
}

TEST_CASE("raster export round trip") {
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / "xrkhs_raster_test";
  fs::create_directories(dir);
  const ImageRaster img = rasterize(shepp_logan(), 64);
  write_raster_csv(img, dir / "img.csv");
  const ImageRaster back = read_raster_csv(dir / "img.csv");
  CHECK(back.side == 64);
  CHECK((back.values.array() == img.values.array()).all());

  write_pgm(img, dir / "img.pgm", "test");
  std::ifstream pgm(dir / "img.pgm", std::ios::binary);
  std::string magic;
  pgm >> magic;
  CHECK(magic == "P5");
  fs::remove_all(dir);
}
