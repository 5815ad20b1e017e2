#pragma once

#include <Eigen/Dense>
#include <filesystem>
#include <optional>
#include <vector>

#include "xrkhs/gram.hpp"

namespace xrkhs {

enum class SolveMethod { tikhonov, mle, circulant };

// Solved representer coefficients: together with the kernel parameters and
// the grids they define the reconstruction
//   f(z) = sum_ij alpha(i, j) * backprojected_generator(phi_i, x_j, z).
struct CoefficientField {
  Eigen::MatrixXd alpha;  // N x M
  double nu = 0.0;
  GaussianKernelParams params;
  AngleGrid grid;
  DetectorMesh mesh;
  SolveMethod provenance = SolveMethod::tikhonov;
  double residual = 0.0;  // ||(W + nu I) vec(alpha) - vec(Y)|| / ||Y||

  Eigen::VectorXd vec() const;
};

// Precomputed factorizations for repeated solves on a fixed (grid, kernel,
// nu). Dense: the Cholesky factor of W + nu I. Circulant: the per-frequency
// Cholesky factors of What_i + (nu/N) I.
struct FactorCache {
  GramLayout layout = GramLayout::dense;
  double nu = 0.0;
  Eigen::MatrixXd dense_llt_lower;
  std::vector<Eigen::MatrixXcd> freq_llt_lower;
};

FactorCache build_factor_cache(const GramMatrix& gram, double nu);

// Appends a versioned factorization section to an existing gram cache file /
// reads it back. load returns nullopt when the file carries no section.
void append_factor_cache(const FactorCache& cache,
                         const std::filesystem::path& gram_file);
std::optional<FactorCache> load_factor_cache(
    const std::filesystem::path& gram_file);

// alpha = (W + nu I)^{-1} Y by symmetric positive-definite factorization.
// One iterative-refinement pass runs if the relative residual exceeds 1e-8.
// `cache` (when given) must match the gram and nu.
CoefficientField solve_tikhonov(const GramMatrix& gram, const Sinogram& sino,
                                double nu, const FactorCache* cache = nullptr);

// Minimum-norm least-squares solution alpha = W^+ Y via eigendecomposition
// with the kRankTol relative cutoff.
CoefficientField solve_mle(const GramMatrix& gram, const Sinogram& sino);

// Block-circulant fast path: length-N FFT across the block index, one
// M x M Hermitian solve per frequency, inverse FFT. O(N M^3 + N M log N)
// with the factorization, O(N M^2 + N M log N) when `cache` supplies it.
CoefficientField solve_circulant(const GramMatrix& gram, const Sinogram& sino,
                                 double nu, const FactorCache* cache = nullptr);

}  // namespace xrkhs
