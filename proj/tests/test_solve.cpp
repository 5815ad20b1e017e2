#include <doctest.h>

#include <filesystem>

#include "xrkhs/recon.hpp"
#include "xrkhs/rng.hpp"

using namespace xrkhs;

namespace {

Sinogram wrap(const GramMatrix& gram, Eigen::MatrixXd values) {
  Sinogram s;
  s.grid = gram.grid;
  s.mesh = gram.mesh;
  s.values = std::move(values);
  return s;
}

Sinogram random_observations(const GramMatrix& gram, std::uint64_t seed) {
  SplitMix64 rng(seed);
  Eigen::MatrixXd Y(gram.n_angles, gram.n_mesh);
  for (int i = 0; i < Y.rows(); ++i) {
    for (int j = 0; j < Y.cols(); ++j) Y(i, j) = rng.next_normal();
  }
  return wrap(gram, std::move(Y));
}

GramMatrix small_gram(int n_angles, int n_mesh, double gamma, std::uint64_t seed) {
  const AngleGrid grid = make_angle_grid(GridKind::random_grid, n_angles, 0.0, seed);
  return assemble_dense({gamma, 2}, grid, make_mesh(n_mesh));
}

}  // namespace

TEST_CASE("identity Gram with unit penalty halves the observations") {
  const GramMatrix g = GramMatrix::synthetic_dense(Eigen::MatrixXd::Identity(6, 6));
  const Sinogram y = random_observations(g, 1);
  const CoefficientField f = solve_tikhonov(g, y, 1.0);
  CHECK((f.alpha - 0.5 * y.values).cwiseAbs().maxCoeff() < 1e-14);
  CHECK(f.residual < 1e-12);
}

TEST_CASE("empirical risk minimum equals the closed form") {
  const GramMatrix g = small_gram(4, 5, 4.0, 2);
  const Sinogram y = random_observations(g, 3);
  const double nu = std::ldexp(1.0, -7);
  const CoefficientField f = solve_tikhonov(g, y, nu);
  const Eigen::VectorXd a = f.vec();
  Eigen::VectorXd yv(g.size());
  for (int i = 0; i < g.n_angles; ++i) {
    yv.segment(i * g.n_mesh, g.n_mesh) = y.values.row(i).transpose();
  }
  const double risk = (yv - g.dense * a).squaredNorm() + nu * a.dot(g.dense * a);
  const double closed = nu * yv.dot(a);
  CHECK(std::abs(risk - closed) <= 1e-8 * std::abs(closed));
}

TEST_CASE("tikhonov solution matches the explicit inverse") {
  const GramMatrix g = small_gram(3, 4, 2.0, 5);
  const Sinogram y = random_observations(g, 7);
  const double nu = 0.01;
  const CoefficientField f = solve_tikhonov(g, y, nu);
  const Eigen::MatrixXd A =
      g.dense + nu * Eigen::MatrixXd::Identity(g.size(), g.size());
  Eigen::VectorXd yv(g.size());
  for (int i = 0; i < g.n_angles; ++i) {
    yv.segment(i * g.n_mesh, g.n_mesh) = y.values.row(i).transpose();
  }
  const Eigen::VectorXd direct = A.inverse() * yv;
  CHECK((f.vec() - direct).norm() < 1e-10 * direct.norm());
}

TEST_CASE("tikhonov rejects non-positive penalties and wrong layouts") {
  const GramMatrix g = small_gram(2, 3, 2.0, 5);
  const Sinogram y = random_observations(g, 7);
  CHECK_THROWS_AS(solve_tikhonov(g, y, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(solve_tikhonov(g, y, -1.0), std::invalid_argument);
  const GramMatrix circ = assemble_circulant({2.0, 2}, 4, make_mesh(3));
  const Sinogram yc = random_observations(circ, 8);
  CHECK_THROWS_AS(solve_tikhonov(circ, yc, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(solve_circulant(g, y, 1.0), std::invalid_argument);
}

TEST_CASE("minimum-norm solution interpolates full-rank observations") {
  const GramMatrix g = small_gram(4, 5, 2.0, 11);
  const Sinogram y = random_observations(g, 13);
  const CoefficientField f = solve_mle(g, y);
  CHECK(f.residual <= 1e-8);

  Sinogram zero = y;
  zero.values.setZero();
  const CoefficientField fz = solve_mle(g, zero);
  CHECK(fz.alpha.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("tikhonov converges to the minimum-norm solution as nu vanishes") {
  // needs a Gram whose smallest eigenvalue clearly dominates the nu range
  const GramMatrix g = small_gram(4, 4, 8.0, 17);
  const Sinogram y = random_observations(g, 19);
  const CoefficientField mle = solve_mle(g, y);
  double prev = -1.0;
  double first = 0.0, last = 0.0;
  for (int k = 2; k <= 8; ++k) {
    const CoefficientField f = solve_tikhonov(g, y, std::pow(10.0, -k));
    const double gap = (f.vec() - mle.vec()).norm();
    if (k == 2) first = gap;
    last = gap;
    if (prev >= 0) CHECK(gap < prev);
    prev = gap;
  }
  CHECK(last <= 1e-4 * first);
}

TEST_CASE("circulant solve agrees with the dense solve") {
  for (const int N : {4, 8}) {
    const int M = 6;
    const GramMatrix circ = assemble_circulant({8.0, 2}, N, make_mesh(M));
    GramMatrix dense = circ;
    dense.layout = GramLayout::dense;
    dense.dense = circ.to_dense();
    dense.blocks.clear();
    const Sinogram y = random_observations(circ, 23 + N);
    const double nu = std::ldexp(1.0, -7);
    const CoefficientField fc = solve_circulant(circ, y, nu);
    const CoefficientField fd = solve_tikhonov(dense, y, nu);
    CHECK((fc.vec() - fd.vec()).norm() <= 1e-8 * fd.vec().norm());
    CHECK(fc.residual <= 1e-8);
  }
}

TEST_CASE("circulant and dense coefficients reconstruct the same image") {
  const int N = 12, M = 10;
  const DetectorMesh mesh = make_mesh(M);
  const GramMatrix circ = assemble_circulant({16.0, 2}, N, mesh);
  GramMatrix dense = circ;
  dense.layout = GramLayout::dense;
  dense.dense = circ.to_dense();
  dense.blocks.clear();
  const Sinogram y =
      simulate_sinogram(shepp_logan(), circ.grid, mesh, 3.0, 61);
  const double nu = std::ldexp(1.0, -6);
  const ImageRaster a = evaluate_reconstruction(solve_circulant(circ, y, nu), 32);
  const ImageRaster b = evaluate_reconstruction(solve_tikhonov(dense, y, nu), 32);
  CHECK((a.values - b.values).cwiseAbs().maxCoeff() <= 1e-7);
}

TEST_CASE("minimum-norm solution lies in the range of the Gram matrix") {
  // a boundary mesh point creates an exact null direction; the minimum-norm
  // coefficients must carry nothing along it
  DetectorMesh mesh;
  mesh.dim = 1;
  mesh.points.resize(4, 1);
  mesh.points << -0.5, 0.0, 0.5, 1.0;
  AssemblyOptions hook;
  hook.allow_boundary_points = true;
  const AngleGrid grid = make_angle_grid(GridKind::random_grid, 3, 0.0, 21);
  const GramMatrix g = assemble_dense({8.0, 2}, grid, mesh, hook);
  const Sinogram y = random_observations(g, 23);
  const CoefficientField f = solve_mle(g, y);
  const double scale = f.alpha.cwiseAbs().maxCoeff();
  for (int i = 0; i < 3; ++i) {
    // the boundary column is a null direction, up to eigenvector roundoff
    CHECK(std::abs(f.alpha(i, 3)) <= 1e-10 * scale);
  }
}

TEST_CASE("single-angle circulant reduces to a dense solve") {
  const GramMatrix circ = assemble_circulant({4.0, 2}, 1, make_mesh(7));
  GramMatrix dense = circ;
  dense.layout = GramLayout::dense;
  dense.dense = circ.to_dense();
  dense.blocks.clear();
  const Sinogram y = random_observations(circ, 29);
  const CoefficientField fc = solve_circulant(circ, y, 0.125);
  const CoefficientField fd = solve_tikhonov(dense, y, 0.125);
  CHECK((fc.vec() - fd.vec()).norm() <= 1e-10 * fd.vec().norm());
}

TEST_CASE("factor caches reproduce the direct solves") {
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / "xrkhs_factor_cache_test";
  fs::create_directories(dir);
  const double nu = std::ldexp(1.0, -5);

  {  // dense
    const GramMatrix g = small_gram(4, 6, 8.0, 31);
    const Sinogram y = random_observations(g, 37);
    const FactorCache cache = build_factor_cache(g, nu);
    const CoefficientField with = solve_tikhonov(g, y, nu, &cache);
    const CoefficientField without = solve_tikhonov(g, y, nu);
    CHECK((with.vec() - without.vec()).norm() <= 1e-10 * without.vec().norm());

    save_gram(g, dir / "g.bin");
    CHECK(!load_factor_cache(dir / "g.bin").has_value());
    append_factor_cache(cache, dir / "g.bin");
    const auto loaded = load_factor_cache(dir / "g.bin");
    REQUIRE(loaded.has_value());
    CHECK(loaded->nu == nu);
    const CoefficientField from_file = solve_tikhonov(g, y, nu, &*loaded);
    CHECK((from_file.vec() - without.vec()).norm() <=
          1e-10 * without.vec().norm());
  }

  {  // circulant
    const GramMatrix circ = assemble_circulant({8.0, 2}, 6, make_mesh(5));
    const Sinogram y = random_observations(circ, 41);
    const FactorCache cache = build_factor_cache(circ, nu);
    const CoefficientField with = solve_circulant(circ, y, nu, &cache);
    const CoefficientField without = solve_circulant(circ, y, nu);
    CHECK((with.vec() - without.vec()).norm() <= 1e-10 * without.vec().norm());

    save_gram(circ, dir / "c.bin");
    append_factor_cache(cache, dir / "c.bin");
    const auto loaded = load_factor_cache(dir / "c.bin");
    REQUIRE(loaded.has_value());
    const CoefficientField from_file = solve_circulant(circ, y, nu, &*loaded);
    CHECK((from_file.vec() - without.vec()).norm() <=
          1e-10 * without.vec().norm());

    // nu mismatch is refused
    CHECK_THROWS_AS(solve_circulant(circ, y, nu * 2, &cache),
                    std::invalid_argument);
  }
  fs::remove_all(dir);
}
