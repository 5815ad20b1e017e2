#include "xrkhs/recon.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace xrkhs {

namespace {
constexpr double kSqrtPi = 1.7724538509055160273;
}

ImageRaster ImageRaster::zero(int side) {
  ImageRaster img;
  img.side = side;
  img.values = Eigen::MatrixXd::Zero(side, side);
  return img;
}

ImageRaster rasterize(const Phantom& phantom, int side) {
  ImageRaster img = ImageRaster::zero(side);
#pragma omp parallel for schedule(static)
  for (int row = 0; row < side; ++row) {
    for (int col = 0; col < side; ++col) {
      if (!img.inside(row, col)) continue;
      img.values(row, col) = phantom.value_at(img.center(col), img.center(row));
    }
  }
  return img;
}

ImageRaster evaluate_reconstruction(const CoefficientField& coeffs, int side) {
  const int N = static_cast<int>(coeffs.alpha.rows());
  const int M = static_cast<int>(coeffs.alpha.cols());
  if (coeffs.grid.size() != N || coeffs.mesh.size() != M) {
    throw std::invalid_argument(
        "evaluate_reconstruction: coefficient grids inconsistent");
  }
  const double gamma = coeffs.params.gamma;
  const double sg = std::sqrt(gamma);
  ImageRaster img = ImageRaster::zero(side);
  if (coeffs.alpha.size() == 0) return img;

  std::vector<double> cos_phi(N), sin_phi(N), xs(M), Wx(M);
  for (int i = 0; i < N; ++i) {
    cos_phi[i] = std::cos(coeffs.grid.angles[i]);
    sin_phi[i] = std::sin(coeffs.grid.angles[i]);
  }
  bool sorted = true;
  for (int j = 0; j < M; ++j) {
    xs[j] = coeffs.mesh.offset(j);
    Wx[j] = chord_half(xs[j]);
    if (j > 0 && xs[j] < xs[j - 1]) sorted = false;
  }
  // Terms with gamma * (x_j - zt)^2 > 60 are below double noise; on a sorted
  // mesh they form the complement of a contiguous window.
  const double window = std::sqrt(60.0 / gamma);

#pragma omp parallel for schedule(dynamic, 4)
  for (int row = 0; row < side; ++row) {
    for (int col = 0; col < side; ++col) {
      if (!img.inside(row, col)) continue;
      const double z1 = img.center(col), z2 = img.center(row);
      double acc = 0.0;
      for (int i = 0; i < N; ++i) {
        const double zt = cos_phi[i] * z1 - sin_phi[i] * z2;
        const double zr = sin_phi[i] * z1 + cos_phi[i] * z2;
        int j_lo = 0, j_hi = M;
        if (sorted) {
          j_lo = static_cast<int>(
              std::lower_bound(xs.begin(), xs.end(), zt - window) - xs.begin());
          j_hi = static_cast<int>(
              std::upper_bound(xs.begin(), xs.end(), zt + window) - xs.begin());
        }
        for (int j = j_lo; j < j_hi; ++j) {
          const double d = xs[j] - zt;
          const double e = gamma * d * d;
          if (e > 60.0) continue;
          acc += coeffs.alpha(i, j) * std::exp(-e) *
                 (std::erf(sg * (Wx[j] - zr)) - std::erf(sg * (-Wx[j] - zr)));
        }
      }
      img.values(row, col) = acc * kSqrtPi / (2.0 * sg);
    }
  }
  return img;
}

double interpolate_sinogram(const CoefficientField& coeffs, double phi,
                            double x) {
  if (std::abs(x) > 1.0 + 1e-12) {
    throw std::invalid_argument("interpolate_sinogram: |x| > 1");
  }
  const int N = static_cast<int>(coeffs.alpha.rows());
  const int M = static_cast<int>(coeffs.alpha.cols());
  if (coeffs.grid.size() != N || coeffs.mesh.size() != M) {
    throw std::invalid_argument(
        "interpolate_sinogram: coefficient grids inconsistent");
  }
  double acc = 0.0;
  for (int i = 0; i < N; ++i) {
    for (int j = 0; j < M; ++j) {
      const RelativeAngleData rad =
          relative_angle_data(phi, coeffs.grid.angles[i], x, coeffs.mesh.offset(j));
      acc += coeffs.alpha(i, j) *
             cross_gram_entry(coeffs.params, rad, x, coeffs.mesh.offset(j));
    }
  }
  return acc;
}

namespace {

// Pixel contribution to a disk integral: full pixel area inside, zero
// outside, 4x4 subsampled coverage when the pixel straddles the boundary.
double disk_coverage(double z1, double z2, double half) {
  const double r_out = std::hypot(std::abs(z1) + half, std::abs(z2) + half);
  if (r_out <= 1.0) return 1.0;
  const double r_in = std::hypot(std::max(0.0, std::abs(z1) - half),
                                 std::max(0.0, std::abs(z2) - half));
  if (r_in >= 1.0) return 0.0;
  int hits = 0;
  for (int a = 0; a < 4; ++a) {
    for (int b = 0; b < 4; ++b) {
      const double u = z1 + half * ((2 * a + 1) / 4.0 - 1.0);
      const double v = z2 + half * ((2 * b + 1) / 4.0 - 1.0);
      if (u * u + v * v <= 1.0) ++hits;
    }
  }
  return hits / 16.0;
}

double binomial(int n, int k) {
  double v = 1.0;
  for (int i = 0; i < k; ++i) v = v * (n - i) / (i + 1);
  return v;
}

}  // namespace

HlccReport hlcc_moment_check(const CoefficientField& coeffs, int degree_max,
                             const std::vector<double>& probe_angles,
                             const QuadratureRule& rule, int raster_side,
                             double tolerance) {
  if (degree_max > 4) {
    throw std::invalid_argument("hlcc_moment_check: degree_max > 4");
  }
  HlccReport report;
  report.tolerance = tolerance;

  // Detector moments of the interpolated sinogram per probe angle, together
  // with the absolute moments that set the comparison scale.
  const int P = static_cast<int>(probe_angles.size());
  std::vector<std::vector<double>> m(degree_max + 1, std::vector<double>(P, 0.0));
  std::vector<std::vector<double>> m_abs(degree_max + 1,
                                         std::vector<double>(P, 0.0));
#pragma omp parallel for schedule(dynamic)
  for (int pi = 0; pi < P; ++pi) {
    for (size_t q = 0; q < rule.nodes.size(); ++q) {
      const double x = rule.nodes[q];
      const double v = interpolate_sinogram(coeffs, probe_angles[pi], x);
      double xl = 1.0;
      for (int l = 0; l <= degree_max; ++l) {
        m[l][pi] += rule.weights[q] * xl * v;
        m_abs[l][pi] += rule.weights[q] * std::abs(xl * v);
        xl *= x;
      }
    }
  }

  // Image moments Integral z1^a z2^b f(z) dz from the rasterized
  // reconstruction, with subsampled coverage weights at the disk boundary.
  const ImageRaster img = evaluate_reconstruction(coeffs, raster_side);
  const double pixel_area = 4.0 / (static_cast<double>(raster_side) * raster_side);
  const double half = 1.0 / raster_side;
  Eigen::MatrixXd img_mom = Eigen::MatrixXd::Zero(degree_max + 1, degree_max + 1);
  for (int row = 0; row < raster_side; ++row) {
    for (int col = 0; col < raster_side; ++col) {
      const double z1 = img.center(col), z2 = img.center(row);
      const double cov = disk_coverage(z1, z2, half);
      if (cov == 0.0) continue;
      const double base = img.values(row, col) * cov * pixel_area;
      double z1a = 1.0;
      for (int a = 0; a <= degree_max; ++a) {
        double z2b = 1.0;
        for (int b = 0; a + b <= degree_max; ++b) {
          img_mom(a, b) += base * z1a * z2b;
          z2b *= z2;
        }
        z1a *= z1;
      }
    }
  }

  report.max_rel_deviation.assign(degree_max + 1, 0.0);
  report.moment_scale.assign(degree_max + 1, 0.0);
  double scale0 = 0.0;
  for (int l = 0; l <= degree_max; ++l) {
    // Deviations are measured against the absolute moment scale, which stays
    // meaningful when the signed moment itself nearly cancels.
    double scale = 0.0;
    std::vector<double> q(P, 0.0);
    for (int pi = 0; pi < P; ++pi) {
      // q_l evaluated at the backprojected unit direction u = (cos, -sin).
      const double u1 = std::cos(probe_angles[pi]);
      const double u2 = -std::sin(probe_angles[pi]);
      double v = 0.0;
      for (int k = 0; k <= l; ++k) {
        v += binomial(l, k) * img_mom(k, l - k) * std::pow(u1, k) *
             std::pow(u2, l - k);
      }
      q[pi] = v;
      scale = std::max(scale, m_abs[l][pi]);
    }
    if (l == 0) scale0 = scale;
    const double floor = std::max(1e-300, 1e-9 * scale0);
    report.moment_scale[l] = scale;
    double dev = 0.0;
    for (int pi = 0; pi < P; ++pi) {
      dev = std::max(dev, std::abs(m[l][pi] - q[pi]) / std::max(scale, floor));
    }
    report.max_rel_deviation[l] = dev;
  }
  report.pass = std::all_of(report.max_rel_deviation.begin(),
                            report.max_rel_deviation.end(),
                            [&](double d) { return d <= tolerance; });
  return report;
}

void write_pgm(const ImageRaster& img, const std::filesystem::path& path,
               const std::string& comment) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path.string());
  const double lo = img.values.minCoeff();
  const double hi = img.values.maxCoeff();
  const double span = hi > lo ? hi - lo : 1.0;
  out << "P5\n# min=" << lo << " max=" << hi;
  if (!comment.empty()) out << ' ' << comment;
  out << '\n' << img.side << ' ' << img.side << "\n255\n";
  // top row of the file is z2 = +1
  for (int row = img.side - 1; row >= 0; --row) {
    for (int col = 0; col < img.side; ++col) {
      const double t = (img.values(row, col) - lo) / span;
      out.put(static_cast<char>(
          static_cast<unsigned char>(std::lround(255.0 * std::clamp(t, 0.0, 1.0)))));
    }
  }
}

void write_raster_csv(const ImageRaster& img, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path.string());
  char buf[32];
  for (int row = 0; row < img.side; ++row) {
    for (int col = 0; col < img.side; ++col) {
      std::snprintf(buf, sizeof(buf), "%.17g", img.values(row, col));
      if (col) out << ',';
      out << buf;
    }
    out << '\n';
  }
}

ImageRaster read_raster_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::vector<std::vector<double>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<double> row;
    std::istringstream iss(line);
    std::string cell;
    while (std::getline(iss, cell, ',')) row.push_back(std::stod(cell));
    rows.push_back(std::move(row));
  }
  const int side = static_cast<int>(rows.size());
  ImageRaster img = ImageRaster::zero(side);
  for (int r = 0; r < side; ++r) {
    if (static_cast<int>(rows[r].size()) != side) {
      throw std::runtime_error("raster csv is not square");
    }
    for (int c = 0; c < side; ++c) img.values(r, c) = rows[r][c];
  }
  return img;
}

}  // namespace xrkhs
