#pragma once

#include <Eigen/Dense>
#include <filesystem>
#include <string>
#include <vector>

#include "xrkhs/solve.hpp"

namespace xrkhs {

// Square image on [-1, 1]^2 with pixel centers at -1 + (2k + 1)/side
// (0-based k). values(row, col) holds the sample at
// (z1, z2) = (center(col), center(row)); pixels whose center falls outside
// the unit disk are masked to 0.
struct ImageRaster {
  int side = 0;
  Eigen::MatrixXd values;

  double center(int k) const { return -1.0 + (2.0 * k + 1.0) / side; }
  bool inside(int row, int col) const {
    const double z1 = center(col), z2 = center(row);
    return z1 * z1 + z2 * z2 <= 1.0;
  }
  static ImageRaster zero(int side);
};

// Samples the phantom at pixel centers (masked outside the disk).
ImageRaster rasterize(const Phantom& phantom, int side);

// f(z) = sum_ij alpha_ij * backprojected_generator(phi_i, x_j, z) at every
// unmasked pixel center.
ImageRaster evaluate_reconstruction(const CoefficientField& coeffs, int side);

// Sinogram interpolation at an arbitrary (angle, offset):
//   P f(phi, x) = sum_ij alpha_ij * cross_gram(phi - phi_i; x, x_j).
double interpolate_sinogram(const CoefficientField& coeffs, double phi,
                            double x);

// Consistency report for the interpolated sinogram: for each degree
// l = 0..degree_max compares the detector moment
//   m_l(phi) = Integral x^l P f(phi, x) dx
// against q_l evaluated at the backprojected direction, where q_l is the
// degree-l moment polynomial of the rasterized reconstruction. Deviations
// are relative to the moment scale per degree.
struct HlccReport {
  std::vector<double> max_rel_deviation;  // indexed by degree
  std::vector<double> moment_scale;
  double tolerance = 1e-3;
  bool pass = false;
};

HlccReport hlcc_moment_check(const CoefficientField& coeffs, int degree_max,
                             const std::vector<double>& probe_angles,
                             const QuadratureRule& rule, int raster_side = 256,
                             double tolerance = 1e-3);

// 8-bit binary PGM, min-max scaled; the recorded scale and any provenance
// string go into a comment line.
void write_pgm(const ImageRaster& img, const std::filesystem::path& path,
               const std::string& comment = "");
// Lossless CSV of the raw 64-bit values.
void write_raster_csv(const ImageRaster& img, const std::filesystem::path& path);
ImageRaster read_raster_csv(const std::filesystem::path& path);

}  // namespace xrkhs
