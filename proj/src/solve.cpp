#include "xrkhs/solve.hpp"

#include <fftw3.h>

#include <cmath>
#include <complex>
#include <cstring>
#include <fstream>
#include <stdexcept>

namespace xrkhs {

namespace {

constexpr char kFactMagic[8] = {'X', 'R', 'K', 'F', 'A', 'C', 'T', '1'};

Eigen::VectorXd vectorize(const Eigen::MatrixXd& values) {
  const int N = static_cast<int>(values.rows());
  const int M = static_cast<int>(values.cols());
  Eigen::VectorXd v(N * M);
  for (int i = 0; i < N; ++i) v.segment(i * M, M) = values.row(i).transpose();
  return v;
}

Eigen::MatrixXd unvectorize(const Eigen::VectorXd& v, int N, int M) {
  Eigen::MatrixXd out(N, M);
  for (int i = 0; i < N; ++i) out.row(i) = v.segment(i * M, M).transpose();
  return out;
}

void check_dims(const GramMatrix& gram, const Sinogram& sino) {
  if (sino.n_angles() != gram.n_angles || sino.n_mesh() != gram.n_mesh) {
    throw std::invalid_argument("solver: sinogram/gram dimension mismatch");
  }
}

CoefficientField make_field(const GramMatrix& gram, double nu,
                            SolveMethod method) {
  CoefficientField f;
  f.nu = nu;
  f.params = gram.params;
  f.grid = gram.grid;
  f.mesh = gram.mesh;
  f.provenance = method;
  return f;
}

using detail::block_dft;

}  // namespace

Eigen::VectorXd CoefficientField::vec() const { return vectorize(alpha); }

FactorCache build_factor_cache(const GramMatrix& gram, double nu) {
  if (!(nu > 0.0)) throw std::invalid_argument("build_factor_cache: nu <= 0");
  FactorCache cache;
  cache.layout = gram.layout;
  cache.nu = nu;
  if (gram.layout == GramLayout::dense) {
    Eigen::MatrixXd A = gram.dense;
    A.diagonal().array() += nu;
    Eigen::LLT<Eigen::Ref<Eigen::MatrixXd>> llt(A);
    if (llt.info() != Eigen::Success) {
      throw std::runtime_error("build_factor_cache: factorization failed");
    }
    cache.dense_llt_lower =
        A.triangularView<Eigen::Lower>().toDenseMatrix();
    return cache;
  }
  const int N = gram.n_angles, M = gram.n_mesh;
  std::vector<std::complex<double>> buf(static_cast<size_t>(N) * M * M);
  for (int d = 0; d < N; ++d) {
    for (int j = 0; j < M; ++j) {
      for (int k = 0; k < M; ++k) {
        buf[(static_cast<size_t>(j) * M + k) * N + d] = gram.blocks[d](j, k);
      }
    }
  }
  block_dft(buf, N, M * M, FFTW_FORWARD, true);
  cache.freq_llt_lower.resize(N);
  for (int i = 0; i < N; ++i) {
    Eigen::MatrixXcd What(M, M);
    for (int j = 0; j < M; ++j) {
      for (int k = 0; k < M; ++k) {
        What(j, k) = buf[(static_cast<size_t>(j) * M + k) * N + i];
      }
    }
    What.diagonal().array() += nu / N;
    Eigen::LLT<Eigen::MatrixXcd> llt(What);
    if (llt.info() != Eigen::Success) {
      throw std::runtime_error(
          "build_factor_cache: frequency-domain factorization failed");
    }
    cache.freq_llt_lower[i] = llt.matrixL();
  }
  return cache;
}

CoefficientField solve_tikhonov(const GramMatrix& gram, const Sinogram& sino,
                                double nu, const FactorCache* cache) {
  if (!(nu > 0.0)) throw std::invalid_argument("solve_tikhonov: nu <= 0");
  if (gram.layout != GramLayout::dense) {
    throw std::invalid_argument("solve_tikhonov: dense layout required");
  }
  check_dims(gram, sino);
  const int N = gram.n_angles, M = gram.n_mesh;
  const Eigen::VectorXd y = vectorize(sino.values);
  Eigen::VectorXd alpha;

  auto apply_regularized = [&](const Eigen::VectorXd& v) -> Eigen::VectorXd {
    return gram.dense * v + nu * v;
  };

  if (cache != nullptr) {
    if (cache->layout != GramLayout::dense || cache->nu != nu) {
      throw std::invalid_argument("solve_tikhonov: factor cache mismatch");
    }
    const auto& L = cache->dense_llt_lower;
    alpha = L.triangularView<Eigen::Lower>().solve(y);
    L.triangularView<Eigen::Lower>().adjoint().solveInPlace(alpha);
  } else {
    Eigen::MatrixXd A = gram.dense;
    A.diagonal().array() += nu;
    Eigen::LLT<Eigen::Ref<Eigen::MatrixXd>> llt(A);
    if (llt.info() != Eigen::Success) {
      const double dmax = A.diagonal().maxCoeff();
      const double dmin = A.diagonal().minCoeff();
      throw std::runtime_error(
          "solve_tikhonov: factorization failed (diagonal range " +
          std::to_string(dmin) + " .. " + std::to_string(dmax) + ")");
    }
    alpha = llt.solve(y);
  }

  CoefficientField f = make_field(gram, nu, SolveMethod::tikhonov);
  const double ynorm = y.norm();
  double resid = ynorm > 0 ? (apply_regularized(alpha) - y).norm() / ynorm : 0.0;
  if (resid > 1e-8 && cache == nullptr) {
    // one refinement pass, then re-check
    Eigen::MatrixXd A = gram.dense;
    A.diagonal().array() += nu;
    Eigen::LLT<Eigen::Ref<Eigen::MatrixXd>> llt(A);
    alpha += llt.solve(y - apply_regularized(alpha));
    resid = (apply_regularized(alpha) - y).norm() / ynorm;
  }
  f.residual = resid;
  f.alpha = unvectorize(alpha, N, M);
  return f;
}

CoefficientField solve_mle(const GramMatrix& gram, const Sinogram& sino) {
  if (gram.layout != GramLayout::dense) {
    throw std::invalid_argument("solve_mle: dense layout required");
  }
  check_dims(gram, sino);
  const Eigen::VectorXd y = vectorize(sino.values);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(gram.dense);
  if (es.info() != Eigen::Success) {
    throw std::runtime_error("solve_mle: eigendecomposition failed");
  }
  const Eigen::VectorXd& evals = es.eigenvalues();
  const double cutoff = kRankTol * evals.cwiseAbs().maxCoeff();
  Eigen::VectorXd coeff = es.eigenvectors().transpose() * y;
  for (int k = 0; k < coeff.size(); ++k) {
    coeff(k) = evals(k) > cutoff ? coeff(k) / evals(k) : 0.0;
  }
  const Eigen::VectorXd alpha = es.eigenvectors() * coeff;
  CoefficientField f = make_field(gram, 0.0, SolveMethod::mle);
  const double ynorm = y.norm();
  f.residual = ynorm > 0 ? (gram.dense * alpha - y).norm() / ynorm : 0.0;
  f.alpha = unvectorize(alpha, gram.n_angles, gram.n_mesh);
  return f;
}

CoefficientField solve_circulant(const GramMatrix& gram, const Sinogram& sino,
                                 double nu, const FactorCache* cache) {
  if (!(nu > 0.0)) throw std::invalid_argument("solve_circulant: nu <= 0");
  if (gram.layout != GramLayout::block_circulant) {
    throw std::invalid_argument("solve_circulant: block-circulant layout required");
  }
  check_dims(gram, sino);
  const int N = gram.n_angles, M = gram.n_mesh;

  // hat Y_i = (1/N) sum_l exp(-2 pi I i l / N) Y_l
  std::vector<std::complex<double>> ybuf(static_cast<size_t>(N) * M);
  for (int i = 0; i < N; ++i) {
    for (int j = 0; j < M; ++j) ybuf[static_cast<size_t>(j) * N + i] = sino.values(i, j);
  }
  block_dft(ybuf, N, M, FFTW_FORWARD, true);

  // Per-frequency Hermitian solves: hat a_i = (1/N)(hat W_i + (nu/N) I)^{-1} hat Y_i
  std::vector<std::complex<double>> abuf(static_cast<size_t>(N) * M);
  auto solve_frequency = [&](int i, const Eigen::MatrixXcd& llt_lower) {
    Eigen::VectorXcd rhs(M);
    for (int j = 0; j < M; ++j) rhs(j) = ybuf[static_cast<size_t>(j) * N + i];
    Eigen::VectorXcd a = llt_lower.triangularView<Eigen::Lower>().solve(rhs);
    llt_lower.triangularView<Eigen::Lower>().adjoint().solveInPlace(a);
    a /= static_cast<double>(N);
    for (int j = 0; j < M; ++j) abuf[static_cast<size_t>(j) * N + i] = a(j);
  };

  // Relative residual ||(W + nu I) a - y|| / ||y||. By Parseval (with the 1/N
  // forward convention) norms transfer to the frequency domain, where the
  // regularized apply is N (What_i a_hat_i) + nu a_hat_i; What comes from the
  // blocks, not from the factorization, so the check is meaningful.
  double rnorm2 = 0.0, ynorm2 = 0.0;
  auto accumulate_residual = [&](int i, const Eigen::MatrixXcd& What_shifted) {
    Eigen::VectorXcd ahat(M), yhat(M);
    for (int j = 0; j < M; ++j) {
      ahat(j) = abuf[static_cast<size_t>(j) * N + i];
      yhat(j) = ybuf[static_cast<size_t>(j) * N + i];
    }
    // What_shifted = What + (nu/N) I, so N * What_shifted * ahat is exactly
    // the frequency image of W a + nu a.
    const Eigen::VectorXcd wa = What_shifted * ahat;
    rnorm2 += (static_cast<double>(N) * wa - yhat).squaredNorm();
    ynorm2 += yhat.squaredNorm();
  };

  if (cache != nullptr) {
    if (cache->layout != GramLayout::block_circulant || cache->nu != nu ||
        static_cast<int>(cache->freq_llt_lower.size()) != N) {
      throw std::invalid_argument("solve_circulant: factor cache mismatch");
    }
    for (int i = 0; i < N; ++i) solve_frequency(i, cache->freq_llt_lower[i]);
  } else {
    std::vector<std::complex<double>> wbuf(static_cast<size_t>(N) * M * M);
    for (int d = 0; d < N; ++d) {
      for (int j = 0; j < M; ++j) {
        for (int k = 0; k < M; ++k) {
          wbuf[(static_cast<size_t>(j) * M + k) * N + d] = gram.blocks[d](j, k);
        }
      }
    }
    block_dft(wbuf, N, M * M, FFTW_FORWARD, true);
    bool failed = false;
#pragma omp parallel for schedule(static) reduction(+ : rnorm2, ynorm2) \
    reduction(|| : failed)
    for (int i = 0; i < N; ++i) {
      Eigen::MatrixXcd What(M, M);
      for (int j = 0; j < M; ++j) {
        for (int k = 0; k < M; ++k) {
          What(j, k) = wbuf[(static_cast<size_t>(j) * M + k) * N + i];
        }
      }
      What.diagonal().array() += nu / N;
      Eigen::LLT<Eigen::MatrixXcd> llt(What);
      if (llt.info() != Eigen::Success) {
        failed = true;
        continue;
      }
      solve_frequency(i, llt.matrixL());
      accumulate_residual(i, What);
    }
    if (failed) {
      throw std::runtime_error("solve_circulant: frequency solve failed");
    }
  }

  // a_i = sum_l exp(+2 pi I i l / N) hat a_l (unnormalized inverse)
  block_dft(abuf, N, M, FFTW_BACKWARD, false);

  double real2 = 0.0, imag2 = 0.0;
  Eigen::MatrixXd alpha(N, M);
  for (int i = 0; i < N; ++i) {
    for (int j = 0; j < M; ++j) {
      const std::complex<double> z = abuf[static_cast<size_t>(j) * N + i];
      alpha(i, j) = z.real();
      real2 += z.real() * z.real();
      imag2 += z.imag() * z.imag();
    }
  }
  if (std::sqrt(imag2) > 1e-9 * std::max(1e-300, std::sqrt(real2))) {
    throw std::runtime_error("solve_circulant: imaginary residue too large");
  }

  CoefficientField f = make_field(gram, nu, SolveMethod::circulant);
  f.alpha = alpha;
  if (cache != nullptr) {
    // no frequency blocks at hand; verify through the block multiply
    const Eigen::VectorXd y = vectorize(sino.values);
    const Eigen::VectorXd av = vectorize(alpha);
    const double ynorm = y.norm();
    f.residual =
        ynorm > 0 ? (gram.multiply(av) + nu * av - y).norm() / ynorm : 0.0;
  } else {
    f.residual = ynorm2 > 0 ? std::sqrt(rnorm2 / ynorm2) : 0.0;
  }
  return f;
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
  if (!in) throw std::runtime_error("factor cache: truncated file");
  return v;
}

// Skips the gram section of a cache file, leaving the stream at the start of
// the (optional) factor section.
void skip_gram_section(std::istream& in) {
  in.seekg(8);  // magic, validated by load_gram beforehand
  get<std::uint32_t>(in);                       // dim
  const auto N = get<std::uint64_t>(in);
  const auto M = get<std::uint64_t>(in);
  get<double>(in);                              // gamma
  const auto layout = get<std::uint32_t>(in);
  const auto n_ang = get<std::uint64_t>(in);
  in.seekg(static_cast<std::streamoff>(n_ang * sizeof(double)), std::ios::cur);
  const auto mr = get<std::uint64_t>(in);
  const auto mc = get<std::uint64_t>(in);
  std::uint64_t payload = mr * mc;
  payload += layout == 0 ? N * M * N * M : N * M * M;
  in.seekg(static_cast<std::streamoff>(payload * sizeof(double)), std::ios::cur);
}
}  // namespace

void append_factor_cache(const FactorCache& cache,
                         const std::filesystem::path& gram_file) {
  std::ofstream out(gram_file, std::ios::binary | std::ios::app);
  if (!out) throw std::runtime_error("cannot open " + gram_file.string());
  out.write(kFactMagic, sizeof(kFactMagic));
  put<std::uint32_t>(out, cache.layout == GramLayout::dense ? 0u : 1u);
  put<double>(out, cache.nu);
  if (cache.layout == GramLayout::dense) {
    const auto& L = cache.dense_llt_lower;
    put<std::uint64_t>(out, static_cast<std::uint64_t>(L.rows()));
    for (Eigen::Index r = 0; r < L.rows(); ++r) {
      for (Eigen::Index c = 0; c <= r; ++c) put<double>(out, L(r, c));
    }
  } else {
    put<std::uint64_t>(out, static_cast<std::uint64_t>(cache.freq_llt_lower.size()));
    put<std::uint64_t>(out,
                       cache.freq_llt_lower.empty()
                           ? 0
                           : static_cast<std::uint64_t>(cache.freq_llt_lower[0].rows()));
    for (const auto& L : cache.freq_llt_lower) {
      for (Eigen::Index r = 0; r < L.rows(); ++r) {
        for (Eigen::Index c = 0; c <= r; ++c) {
          put<double>(out, L(r, c).real());
          put<double>(out, L(r, c).imag());
        }
      }
    }
  }
}

std::optional<FactorCache> load_factor_cache(
    const std::filesystem::path& gram_file) {
  std::ifstream in(gram_file, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + gram_file.string());
  skip_gram_section(in);
  char magic[8];
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, kFactMagic, sizeof(magic)) != 0) {
    return std::nullopt;
  }
  FactorCache cache;
  cache.layout =
      get<std::uint32_t>(in) == 0 ? GramLayout::dense : GramLayout::block_circulant;
  cache.nu = get<double>(in);
  if (cache.layout == GramLayout::dense) {
    const auto n = static_cast<Eigen::Index>(get<std::uint64_t>(in));
    cache.dense_llt_lower = Eigen::MatrixXd::Zero(n, n);
    for (Eigen::Index r = 0; r < n; ++r) {
      for (Eigen::Index c = 0; c <= r; ++c) {
        cache.dense_llt_lower(r, c) = get<double>(in);
      }
    }
  } else {
    const auto count = get<std::uint64_t>(in);
    const auto m = static_cast<Eigen::Index>(get<std::uint64_t>(in));
    cache.freq_llt_lower.assign(count, Eigen::MatrixXcd::Zero(m, m));
    for (auto& L : cache.freq_llt_lower) {
      for (Eigen::Index r = 0; r < m; ++r) {
        for (Eigen::Index c = 0; c <= r; ++c) {
          const double re = get<double>(in);
          const double im = get<double>(in);
          L(r, c) = std::complex<double>(re, im);
        }
      }
    }
  }
  return cache;
}

}  // namespace xrkhs
