#pragma once

#include <Eigen/Dense>
#include <complex>
#include <filesystem>
#include <vector>

#include "xrkhs/data.hpp"
#include "xrkhs/kernels.hpp"

namespace xrkhs {

// Relative eigenvalue cutoff below which a Gram eigenvalue counts as zero.
inline constexpr double kRankTol = 1e-10;

enum class GramLayout { dense, block_circulant };

// NM x NM positive-semidefinite weight matrix of inner products between
// backprojected generators at all (angle, detector) pairs; the design matrix
// of the representer normal equation. Vectorization order: index (i, j) maps
// to i * M + j, so the matrix is N x N blocks of M x M.
//
// The block_circulant layout stores only the first block row W_0..W_{N-1}
// with entry (i,j),(i',j') = [W_{(i-i') mod N}]_{j,j'}; it applies to the
// equiangular full-circle grid, where W_{N-d} = W_d^T.
struct GramMatrix {
  GramLayout layout = GramLayout::dense;
  int n_angles = 0;  // N
  int n_mesh = 0;    // M
  Eigen::MatrixXd dense;                // dense layout
  std::vector<Eigen::MatrixXd> blocks;  // circulant layout, N blocks of M x M
  GaussianKernelParams params;
  AngleGrid grid;
  DetectorMesh mesh;

  int size() const { return n_angles * n_mesh; }
  Eigen::MatrixXd to_dense() const;  // expands the circulant layout
  // W * v without materializing the dense expansion; the circulant layout
  // multiplies through the block FFT in O(N M^2 + N M log N).
  Eigen::VectorXd multiply(const Eigen::VectorXd& v) const;

  // Wraps an explicit symmetric matrix (synthetic inputs for tests and the
  // stability analysis); grid/mesh are left empty.
  static GramMatrix synthetic_dense(Eigen::MatrixXd w);
};

struct AssemblyOptions {
  // Admit mesh points inside the boundary margin. Only meant for studying
  // the zero-row behaviour of the spectrum; production assembly rejects
  // such points.
  bool allow_boundary_points = false;
};

// Dense assembly over an arbitrary planar angle grid. Entries are the
// closed-form cross-Gram values at the relative angle phi_i - phi_{i'};
// the upper block triangle is computed and mirrored.
GramMatrix assemble_dense(const GaussianKernelParams& params,
                          const AngleGrid& grid, const DetectorMesh& mesh,
                          const AssemblyOptions& opts = {});

// Block-circulant assembly on the equiangular full-circle grid
// phi_i = 2 pi i / N: N M^2 closed-form evaluations instead of (NM)^2.
GramMatrix assemble_circulant(const GaussianKernelParams& params, int n_angles,
                              const DetectorMesh& mesh,
                              const AssemblyOptions& opts = {});

struct GramSpectrum {
  Eigen::VectorXd eigenvalues;  // ascending
  double largest = 0.0;
  double smallest_nonzero = 0.0;  // smallest eigenvalue > kRankTol * largest
  int rank = 0;
};

// Full symmetric eigendecomposition; throws on an all-zero matrix.
GramSpectrum gram_spectrum(const GramMatrix& gram);

// --- binary cache ---
// Header: magic "XRKGRAM1", u32 dim, u64 N, u64 M, f64 gamma, u32 layout,
// u64 count of angle values, angles as f64, u64 mesh rows, u64 mesh cols,
// mesh points as f64, then the payload: row-major dense matrix, or the N
// blocks in order, all 64-bit little-endian reals. An optional factorization
// section may follow (see solve.hpp).
void save_gram(const GramMatrix& gram, const std::filesystem::path& path);
GramMatrix load_gram(const std::filesystem::path& path);

namespace detail {
// In-place DFT of `count` contiguous length-n sequences stored as
// buf[c * n + l]; sign is FFTW_FORWARD/FFTW_BACKWARD, and `normalize`
// divides by n (the 1/n convention of the circulant derivation).
void block_dft(std::vector<std::complex<double>>& buf, int n, int count,
               int sign, bool normalize);
}  // namespace detail

}  // namespace xrkhs
