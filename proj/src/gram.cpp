#include "xrkhs/gram.hpp"

#include <fftw3.h>

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <stdexcept>

static_assert(std::endian::native == std::endian::little,
              "gram cache assumes a little-endian host");

namespace xrkhs {

namespace {
constexpr char kGramMagic[8] = {'X', 'R', 'K', 'G', 'R', 'A', 'M', '1'};

void check_mesh(const DetectorMesh& mesh, const AssemblyOptions& opts) {
  if (!opts.allow_boundary_points) validate(mesh);
}

// One M x M block of cross-Gram entries at relative angle dphi.
Eigen::MatrixXd gram_block(const GaussianKernelParams& params,
                           const DetectorMesh& mesh, double dphi) {
  const int M = mesh.size();
  Eigen::MatrixXd block(M, M);
  for (int j = 0; j < M; ++j) {
    for (int k = 0; k < M; ++k) {
      const RelativeAngleData rad =
          relative_angle_data(dphi, 0.0, mesh.offset(j), mesh.offset(k));
      block(j, k) = cross_gram_entry(params, rad, mesh.offset(j), mesh.offset(k));
    }
  }
  return block;
}
}  // namespace

Eigen::MatrixXd GramMatrix::to_dense() const {
  if (layout == GramLayout::dense) return dense;
  const int N = n_angles, M = n_mesh;
  Eigen::MatrixXd full(N * M, N * M);
  for (int i = 0; i < N; ++i) {
    for (int ip = 0; ip < N; ++ip) {
      const int d = ((i - ip) % N + N) % N;
      full.block(i * M, ip * M, M, M) = blocks[d];
    }
  }
  return full;
}

namespace detail {

void block_dft(std::vector<std::complex<double>>& buf, int n, int count,
               int sign, bool normalize) {
  fftw_complex* data = reinterpret_cast<fftw_complex*>(buf.data());
  fftw_plan plan = fftw_plan_many_dft(1, &n, count, data, nullptr, 1, n, data,
                                      nullptr, 1, n, sign, FFTW_ESTIMATE);
  fftw_execute(plan);
  fftw_destroy_plan(plan);
  if (normalize) {
    for (auto& z : buf) z /= static_cast<double>(n);
  }
}

}  // namespace detail

Eigen::VectorXd GramMatrix::multiply(const Eigen::VectorXd& v) const {
  if (layout == GramLayout::dense) return dense * v;
  // Diagonalize across the block index: out_hat_i = N * W_hat_i * v_hat_i,
  // then invert the transform (same 1/N convention as the circulant solver).
  const int N = n_angles, M = n_mesh;
  std::vector<std::complex<double>> wbuf(static_cast<size_t>(N) * M * M);
  std::vector<std::complex<double>> vbuf(static_cast<size_t>(N) * M);
  for (int d = 0; d < N; ++d) {
    for (int j = 0; j < M; ++j) {
      for (int k = 0; k < M; ++k) {
        wbuf[(static_cast<size_t>(j) * M + k) * N + d] = blocks[d](j, k);
      }
    }
  }
  for (int i = 0; i < N; ++i) {
    for (int j = 0; j < M; ++j) {
      vbuf[static_cast<size_t>(j) * N + i] = v(i * M + j);
    }
  }
  detail::block_dft(wbuf, N, M * M, FFTW_FORWARD, true);
  detail::block_dft(vbuf, N, M, FFTW_FORWARD, true);
  std::vector<std::complex<double>> obuf(static_cast<size_t>(N) * M);
  Eigen::VectorXcd vi(M);
  Eigen::MatrixXcd What(M, M);
  for (int i = 0; i < N; ++i) {
    for (int j = 0; j < M; ++j) vi(j) = vbuf[static_cast<size_t>(j) * N + i];
    for (int j = 0; j < M; ++j) {
      for (int k = 0; k < M; ++k) {
        What(j, k) = wbuf[(static_cast<size_t>(j) * M + k) * N + i];
      }
    }
    const Eigen::VectorXcd oi = static_cast<double>(N) * (What * vi);
    for (int j = 0; j < M; ++j) obuf[static_cast<size_t>(j) * N + i] = oi(j);
  }
  detail::block_dft(obuf, N, M, FFTW_BACKWARD, false);
  Eigen::VectorXd out(N * M);
  for (int i = 0; i < N; ++i) {
    for (int j = 0; j < M; ++j) out(i * M + j) = obuf[static_cast<size_t>(j) * N + i].real();
  }
  return out;
}

GramMatrix GramMatrix::synthetic_dense(Eigen::MatrixXd w) {
  if (w.rows() != w.cols()) {
    throw std::invalid_argument("synthetic_dense: square matrix required");
  }
  GramMatrix g;
  g.layout = GramLayout::dense;
  g.n_angles = 1;
  g.n_mesh = static_cast<int>(w.rows());
  g.dense = std::move(w);
  return g;
}

GramMatrix assemble_dense(const GaussianKernelParams& params,
                          const AngleGrid& grid, const DetectorMesh& mesh,
                          const AssemblyOptions& opts) {
  validate(params);
  check_mesh(mesh, opts);
  if (mesh.dim != 1) {
    throw std::invalid_argument("assemble_dense: planar geometry only");
  }
  const int N = grid.size();
  const int M = mesh.size();
  GramMatrix g;
  g.layout = GramLayout::dense;
  g.n_angles = N;
  g.n_mesh = M;
  g.params = params;
  g.grid = grid;
  g.mesh = mesh;
  g.dense.resize(N * M, N * M);

  // Upper block triangle; the lower one is the blockwise transpose. The
  // (i, i') block pairs are independent, so the loop is flattened for the
  // parallel schedule.
  std::vector<std::pair<int, int>> pairs;
  pairs.reserve(N * (N + 1) / 2);
  for (int i = 0; i < N; ++i) {
    for (int ip = i; ip < N; ++ip) pairs.emplace_back(i, ip);
  }
#pragma omp parallel for schedule(dynamic)
  for (std::ptrdiff_t t = 0; t < static_cast<std::ptrdiff_t>(pairs.size()); ++t) {
    const auto [i, ip] = pairs[t];
    const Eigen::MatrixXd block =
        gram_block(params, mesh, grid.angles[i] - grid.angles[ip]);
    g.dense.block(i * M, ip * M, M, M) = block;
    if (ip != i) g.dense.block(ip * M, i * M, M, M) = block.transpose();
  }
  return g;
}

GramMatrix assemble_circulant(const GaussianKernelParams& params, int n_angles,
                              const DetectorMesh& mesh,
                              const AssemblyOptions& opts) {
  validate(params);
  check_mesh(mesh, opts);
  if (mesh.dim != 1) {
    throw std::invalid_argument("assemble_circulant: planar geometry only");
  }
  const int N = n_angles;
  GramMatrix g;
  g.layout = GramLayout::block_circulant;
  g.n_angles = N;
  g.n_mesh = mesh.size();
  g.params = params;
  g.grid = make_angle_grid(GridKind::equiangular_full, N);
  g.mesh = mesh;
  g.blocks.resize(N);
#pragma omp parallel for schedule(dynamic)
  for (int d = 0; d < N; ++d) {
    g.blocks[d] = gram_block(params, mesh, 2.0 * 3.14159265358979323846 * d / N);
  }
  return g;
}

GramSpectrum gram_spectrum(const GramMatrix& gram) {
  const Eigen::MatrixXd W = gram.to_dense();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(W);
  if (es.info() != Eigen::Success) {
    throw std::runtime_error("gram_spectrum: eigendecomposition failed");
  }
  GramSpectrum spec;
  spec.eigenvalues = es.eigenvalues();
  spec.largest = spec.eigenvalues(spec.eigenvalues.size() - 1);
  if (!(spec.largest > 0.0)) {
    throw std::runtime_error("gram_spectrum: rank zero matrix");
  }
  const double cutoff = kRankTol * spec.largest;
  spec.smallest_nonzero = spec.largest;
  for (int k = 0; k < spec.eigenvalues.size(); ++k) {
    if (spec.eigenvalues(k) > cutoff) {
      spec.smallest_nonzero = spec.eigenvalues(k);
      spec.rank = static_cast<int>(spec.eigenvalues.size()) - k;
      break;
    }
  }
  return spec;
}

namespace {
template <typename T>
void put(std::ostream& out, const T& v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}
template <typename T>
T get(std::istream& in) {
  T v;
  in.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!in) throw std::runtime_error("gram cache: truncated file");
  return v;
}
void put_matrix(std::ostream& out, const Eigen::MatrixXd& m) {
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) put(out, m(r, c));
  }
}
void get_matrix(std::istream& in, Eigen::MatrixXd& m) {
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) m(r, c) = get<double>(in);
  }
}
}  // namespace

void save_gram(const GramMatrix& gram, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path.string());
  out.write(kGramMagic, sizeof(kGramMagic));
  put<std::uint32_t>(out, static_cast<std::uint32_t>(gram.params.dim));
  put<std::uint64_t>(out, static_cast<std::uint64_t>(gram.n_angles));
  put<std::uint64_t>(out, static_cast<std::uint64_t>(gram.n_mesh));
  put<double>(out, gram.params.gamma);
  put<std::uint32_t>(out, gram.layout == GramLayout::dense ? 0u : 1u);
  put<std::uint64_t>(out, static_cast<std::uint64_t>(gram.grid.angles.size()));
  for (double a : gram.grid.angles) put(out, a);
  put<std::uint64_t>(out, static_cast<std::uint64_t>(gram.mesh.points.rows()));
  put<std::uint64_t>(out, static_cast<std::uint64_t>(gram.mesh.points.cols()));
  put_matrix(out, gram.mesh.points);
  if (gram.layout == GramLayout::dense) {
    put_matrix(out, gram.dense);
  } else {
    for (const auto& b : gram.blocks) put_matrix(out, b);
  }
}

GramMatrix load_gram(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  char magic[8];
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, kGramMagic, sizeof(magic)) != 0) {
    throw std::runtime_error("not a gram cache file: " + path.string());
  }
  GramMatrix g;
  g.params.dim = static_cast<int>(get<std::uint32_t>(in));
  g.n_angles = static_cast<int>(get<std::uint64_t>(in));
  g.n_mesh = static_cast<int>(get<std::uint64_t>(in));
  g.params.gamma = get<double>(in);
  g.layout = get<std::uint32_t>(in) == 0 ? GramLayout::dense
                                         : GramLayout::block_circulant;
  const auto n_ang = get<std::uint64_t>(in);
  g.grid.angles.resize(n_ang);
  for (auto& a : g.grid.angles) a = get<double>(in);
  g.grid.kind = g.layout == GramLayout::block_circulant
                    ? GridKind::equiangular_full
                    : GridKind::random_grid;
  const auto mr = get<std::uint64_t>(in);
  const auto mc = get<std::uint64_t>(in);
  g.mesh.points.resize(static_cast<Eigen::Index>(mr), static_cast<Eigen::Index>(mc));
  g.mesh.dim = static_cast<int>(mc);
  get_matrix(in, g.mesh.points);
  if (g.layout == GramLayout::dense) {
    g.dense.resize(g.size(), g.size());
    get_matrix(in, g.dense);
  } else {
    g.blocks.assign(g.n_angles, Eigen::MatrixXd(g.n_mesh, g.n_mesh));
    for (auto& b : g.blocks) get_matrix(in, b);
  }
  return g;
}

}  // namespace xrkhs
