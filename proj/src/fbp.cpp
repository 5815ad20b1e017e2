#include "xrkhs/fbp.hpp"

#include <fftw3.h>

#include <cmath>
#include <stdexcept>
#include <vector>

namespace xrkhs {

namespace {
constexpr double kPi = 3.14159265358979323846;
}

void validate(const FbpConfig& cfg) {
  if (cfg.pad_factor < 2 || (cfg.pad_factor & (cfg.pad_factor - 1)) != 0) {
    throw std::invalid_argument("FbpConfig: pad_factor must be a power of two >= 2");
  }
}

ImageRaster fbp_reconstruct(const Sinogram& sino, int side,
                            const FbpConfig& cfg) {
  validate(cfg);
  const int N = sino.n_angles();
  const int M = sino.n_mesh();
  if (N < 1 || M < 2) {
    throw std::invalid_argument("fbp_reconstruct: empty sinogram");
  }
  const double x0 = sino.mesh.offset(0);
  const double ds = sino.mesh.offset(1) - x0;
  for (int j = 1; j < M; ++j) {
    if (std::abs(sino.mesh.offset(j) - (x0 + j * ds)) > 1e-9) {
      throw std::invalid_argument("fbp_reconstruct: mesh must be uniform");
    }
  }

  const int L = cfg.pad_factor * M;
  std::vector<double> real_buf(L);
  std::vector<fftw_complex> spec_buf(L / 2 + 1);
  fftw_plan fwd = fftw_plan_dft_r2c_1d(L, real_buf.data(), spec_buf.data(),
                                       FFTW_ESTIMATE);
  fftw_plan bwd = fftw_plan_dft_c2r_1d(L, spec_buf.data(), real_buf.data(),
                                       FFTW_ESTIMATE);

  // Ramp-filtered projections; the |w| response uses the angular frequency
  // w_k = 2 pi k / (L ds), and the c2r pass carries the usual 1/L.
  Eigen::MatrixXd filtered(N, M);
  for (int i = 0; i < N; ++i) {
    for (int m = 0; m < L; ++m) real_buf[m] = m < M ? sino.values(i, m) : 0.0;
    fftw_execute(fwd);
    for (int k = 0; k <= L / 2; ++k) {
      const double ramp = 2.0 * kPi * k / (L * ds);
      spec_buf[k][0] *= ramp;
      spec_buf[k][1] *= ramp;
    }
    fftw_execute(bwd);
    for (int m = 0; m < M; ++m) filtered(i, m) = real_buf[m] / L;
  }
  fftw_destroy_plan(fwd);
  fftw_destroy_plan(bwd);

  std::vector<double> cos_phi(N), sin_phi(N);
  for (int i = 0; i < N; ++i) {
    cos_phi[i] = std::cos(sino.grid.angles[i]);
    sin_phi[i] = std::sin(sino.grid.angles[i]);
  }

  ImageRaster img = ImageRaster::zero(side);
  const double scale = cfg.intensity_scale / (2.0 * N);
#pragma omp parallel for schedule(static)
  for (int row = 0; row < side; ++row) {
    for (int col = 0; col < side; ++col) {
      if (!img.inside(row, col)) continue;
      const double z1 = img.center(col), z2 = img.center(row);
      double acc = 0.0;
      for (int i = 0; i < N; ++i) {
        // detector coordinate of the pixel at this angle
        const double s = z1 * cos_phi[i] - z2 * sin_phi[i];
        const double pos = (s - x0) / ds;
        const int p = static_cast<int>(std::floor(pos));
        if (p < -1 || p > M - 1) continue;
        const double frac = pos - p;
        const double left = p >= 0 ? filtered(i, p) : 0.0;
        const double right = p + 1 < M ? filtered(i, p + 1) : 0.0;
        acc += left * (1.0 - frac) + right * frac;
      }
      img.values(row, col) = acc * scale;
    }
  }
  return img;
}

}  // namespace xrkhs
