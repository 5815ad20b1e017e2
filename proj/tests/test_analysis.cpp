#include <doctest.h>

#include <cmath>

#include "xrkhs/analysis.hpp"
#include "xrkhs/rng.hpp"

using namespace xrkhs;

namespace {
GramMatrix small_gram(int n_angles, int n_mesh, double gamma, std::uint64_t seed) {
  const AngleGrid grid = make_angle_grid(GridKind::random_grid, n_angles, 0.0, seed);
  return assemble_dense({gamma, 2}, grid, make_mesh(n_mesh));
}
}  // namespace

TEST_CASE("stability bound closed form") {
  Eigen::MatrixXd W(2, 2);
  W << 2.0, 0.0, 0.0, 1.0;
  const GramMatrix g = GramMatrix::synthetic_dense(W);

  // noiseless budget
  CHECK(stability_bound(g, 0.5, 2.0, 0.0).bound == doctest::Approx(4.0));
  // d = 1: eps^2 / (d + 2 nu) = 1/3
  CHECK(stability_bound(g, 1.0, 0.0, 1.0).bound == doctest::Approx(1.0 / 3.0));
  // large penalty pushes the noise term away
  CHECK(stability_bound(g, 1e12, 1.0, 1.0).bound ==
        doctest::Approx(1.0).epsilon(1e-10));
  CHECK_THROWS_AS(stability_bound(g, 0.0, 1.0, 1.0), std::invalid_argument);
}

TEST_CASE("stability bound is monotone in nu and d") {
  const GramMatrix g = small_gram(3, 4, 2.0, 3);
  double prev = 1e300;
  for (double nu : {0.01, 0.1, 1.0, 10.0}) {
    const double b = stability_bound(g, nu, 1.0, 1.0).bound;
    CHECK(b < prev);
    prev = b;
  }
  // larger d at fixed budgets shrinks the bound
  Eigen::MatrixXd W1 = Eigen::MatrixXd::Identity(3, 3) * 0.5;
  Eigen::MatrixXd W2 = Eigen::MatrixXd::Identity(3, 3) * 2.0;
  CHECK(stability_bound(GramMatrix::synthetic_dense(W2), 0.3, 1.0, 1.0).bound <
        stability_bound(GramMatrix::synthetic_dense(W1), 0.3, 1.0, 1.0).bound);
}

TEST_CASE("adversarial instance attains the bound") {
  for (int inst = 0; inst < 4; ++inst) {
    const GramMatrix g = small_gram(3 + inst % 3, 4 + inst % 2, 2.0, 100 + inst);
    const GramSpectrum spec = gram_spectrum(g);
    const double d = spec.smallest_nonzero;
    const double nu = 1e-2 * spec.largest;
    const double rho = 1.0;
    const double eps = 0.8 * rho * std::sqrt(d) * (d + 2 * nu) / nu;
    const AdversarialInstance adv = adversarial_instance(g, nu, rho, eps);
    const double ratio = adv.report.achieved / adv.report.bound;
    CHECK(ratio >= 1.0 - 1e-6);
    CHECK(ratio <= 1.0 + 1e-8);
    CHECK(std::abs(adv.noise.norm() - eps) <= 1e-12 * eps);
    // the budget split is exact up to eigensolver error scaled by lmax/d
    CHECK(std::abs(hnorm2(g, adv.alpha0) + adv.perp_norm2 - rho * rho) <= 1e-7);
  }
}

TEST_CASE("zero-signal instance reaches the bound in the small-penalty limit") {
  const GramMatrix g = small_gram(4, 5, 4.0, 9);
  const double d = gram_spectrum(g).smallest_nonzero;
  const double nu = 1e-5 * d;
  const AdversarialInstance adv = adversarial_instance(g, nu, 0.0, 1.0);
  CHECK(adv.perp_norm2 == 0.0);
  CHECK(adv.alpha0.cwiseAbs().maxCoeff() == 0.0);
  CHECK(std::abs(adv.report.achieved - adv.report.bound) <=
        1e-8 * adv.report.bound);
}

TEST_CASE("random noise stays below the bound") {
  SplitMix64 rng(55);
  const GramMatrix g = small_gram(4, 4, 2.0, 11);
  const double d = gram_spectrum(g).smallest_nonzero;
  const double nu = 0.05;
  const double rho = 1.0, eps = 0.5;
  const double bound = stability_bound(g, nu, rho, eps).bound;
  for (int draw = 0; draw < 20; ++draw) {
    Eigen::VectorXd alpha0(g.size()), noise(g.size());
    for (int k = 0; k < g.size(); ++k) {
      alpha0(k) = rng.next_normal();
      noise(k) = rng.next_normal();
    }
    alpha0 *= rho / std::sqrt(hnorm2(g, alpha0));
    noise *= eps / noise.norm();
    Sinogram obs;
    obs.grid = g.grid;
    obs.mesh = g.mesh;
    const Eigen::VectorXd y = g.dense * alpha0 + noise;
    obs.values.resize(g.n_angles, g.n_mesh);
    for (int i = 0; i < g.n_angles; ++i) {
      obs.values.row(i) = y.segment(i * g.n_mesh, g.n_mesh).transpose();
    }
    const CoefficientField fit = solve_tikhonov(g, obs, nu);
    const Eigen::VectorXd diff = fit.vec() - alpha0;
    CHECK(hnorm2(g, diff) <= bound * (1.0 + 1e-8));
  }
  (void)d;
}

TEST_CASE("mse decomposition degenerate cases") {
  const GramMatrix g = small_gram(3, 4, 2.0, 13);
  const Eigen::VectorXd zero = Eigen::VectorXd::Zero(g.size());
  const MseReport none = mse_decomposition(g, 0.1, zero, 0.0, 0.0);
  CHECK(none.total == 0.0);
  CHECK(none.bias_term == 0.0);
  CHECK(none.variance_term == 0.0);

  // bias vanishes with the penalty on a full-rank Gram
  Eigen::VectorXd alpha0 = Eigen::VectorXd::Ones(g.size());
  const MseReport tiny = mse_decomposition(g, 1e-10, alpha0, 0.0, 0.0);
  const MseReport big = mse_decomposition(g, 1e-2, alpha0, 0.0, 0.0);
  CHECK(tiny.bias_term < 1e-12 * big.bias_term);

  const MseReport with_proj = mse_decomposition(g, 0.1, alpha0, 2.0, 0.7);
  CHECK(with_proj.projection_term == 0.7);
  CHECK(with_proj.total ==
        with_proj.bias_term + with_proj.variance_term + 0.7);
  CHECK(with_proj.bias_term >= 0.0);
  CHECK(with_proj.variance_term >= 0.0);
}

TEST_CASE("mse decomposition matches a light Monte-Carlo run") {
  const GramMatrix g = small_gram(4, 5, 4.0, 15);
  const double nu = 0.05, sigma = 2.0;
  SplitMix64 coeff_rng(77);
  Eigen::VectorXd alpha0(g.size());
  for (int k = 0; k < g.size(); ++k) alpha0(k) = coeff_rng.next_normal();
  const FactorCache cache = build_factor_cache(g, nu);
  const int draws = 300;
  double sum = 0.0, sum2 = 0.0;
  for (int r = 0; r < draws; ++r) {
    SplitMix64 noise(derive_seed(7, r), 1);
    Eigen::VectorXd y = g.dense * alpha0;
    for (int k = 0; k < g.size(); ++k) y(k) += sigma * noise.next_normal();
    Sinogram obs;
    obs.grid = g.grid;
    obs.mesh = g.mesh;
    obs.values.resize(g.n_angles, g.n_mesh);
    for (int i = 0; i < g.n_angles; ++i) {
      obs.values.row(i) = y.segment(i * g.n_mesh, g.n_mesh).transpose();
    }
    const CoefficientField fit = solve_tikhonov(g, obs, nu, &cache);
    const Eigen::VectorXd diff = fit.vec() - alpha0;
    const double err = diff.dot(g.dense * diff);
    sum += err;
    sum2 += err * err;
  }
  const double mean = sum / draws;
  const double se = std::sqrt((sum2 - sum * sum / draws) / (draws - 1) / draws);
  const MseReport rep = mse_decomposition(g, nu, alpha0, sigma, 0.0);
  CHECK(std::abs(mean - rep.total) <= 3.0 * se);
}

TEST_CASE("hnorm agrees between dense and circulant assembly orders") {
  SplitMix64 rng(99);
  const int N = 6, M = 5;
  const DetectorMesh mesh = make_mesh(M);
  const GramMatrix circ = assemble_circulant({8.0, 2}, N, mesh);
  const GramMatrix dense =
      assemble_dense({8.0, 2}, make_angle_grid(GridKind::equiangular_full, N), mesh);
  Eigen::VectorXd a(N * M);
  for (int k = 0; k < N * M; ++k) a(k) = rng.next_normal();
  CHECK(std::abs(hnorm2(circ, a) - hnorm2(dense, a)) <=
        1e-10 * std::abs(hnorm2(dense, a)));
}

TEST_CASE("rmse basics and the oracle comparison") {
  const ImageRaster truth = rasterize(shepp_logan(), 48);
  CHECK(rmse(truth, truth) == 0.0);

  ImageRaster zero = ImageRaster::zero(48);
  ImageRaster constant = ImageRaster::zero(48);
  for (int r = 0; r < 48; ++r) {
    for (int c = 0; c < 48; ++c) {
      if (constant.inside(r, c)) constant.values(r, c) = 1.7;
    }
  }
  CHECK(rmse(constant, zero) == doctest::Approx(1.7).epsilon(1e-14));

  // shifted disk pair against an independent two-line computation
  Phantom d1, d2;
  d1.ellipses.push_back({{0.0, 0.0}, {0.4, 0.4}, 0.0, 1.0});
  d2.ellipses.push_back({{2.0 / 48, 0.0}, {0.4, 0.4}, 0.0, 1.0});
  const ImageRaster r1 = rasterize(d1, 48);
  const ImageRaster r2 = rasterize(d2, 48);
  double acc = 0.0;
  long cnt = 0;
  for (int r = 0; r < 48; ++r) {
    for (int c = 0; c < 48; ++c) {
      if (!r1.inside(r, c)) continue;
      const double d = r1.values(r, c) - r2.values(r, c);
      acc += d * d;
      ++cnt;
    }
  }
  CHECK(rmse(r1, r2) == doctest::Approx(std::sqrt(acc / cnt)).epsilon(1e-14));

  ImageRaster other = ImageRaster::zero(32);
  CHECK_THROWS_AS(rmse(truth, other), std::invalid_argument);
}

TEST_CASE("stability reports serialize to csv rows") {
  const GramMatrix g = small_gram(3, 4, 2.0, 21);
  const StabilityReport rep = stability_bound(g, 0.5, 1.0, 2.0);
  CHECK(stability_csv_header() == "config,rho,eps,nu,d,bound,achieved");
  const std::string row = stability_csv_row(rep, "cafe");
  CHECK(row.substr(0, 5) == "cafe,");
  CHECK(std::count(row.begin(), row.end(), ',') == 6);
}
