#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace xrkhs {

// Mesh points within this distance of the unit sphere are rejected: a
// boundary point produces an all-zero Gram row, which only destabilizes the
// pseudo-inverse without contributing data.
inline constexpr double kBoundaryMargin = 1e-6;

struct Ellipse {
  Eigen::Vector2d center;
  Eigen::Vector2d semi_axes;
  double rotation = 0.0;  // radians, counterclockwise
  double intensity = 0.0;
};

// Piecewise-constant test object: a superposition of ellipses scaled by a
// global intensity multiplier. All ellipses must fit inside the unit disk.
struct Phantom {
  std::vector<Ellipse> ellipses;
  double scale = 1.0;

  double value_at(double z1, double z2) const;
};

// Ten-ellipse head phantom (Shepp & Logan 1974 parameterization),
// intensified by a factor of 10.
Phantom shepp_logan();

void validate(const Phantom& p);

enum class GridKind { equiangular_full, equiangular_half, random_grid, lambda_mix };

// Viewing angles. equiangular_full covers [0, 2pi) with phi_i = 2 pi i / N
// (the layout the block-circulant solver requires); the other kinds cover
// [0, pi).
struct AngleGrid {
  std::vector<double> angles;
  GridKind kind = GridKind::equiangular_half;
  double lambda = 1.0;  // lambda_mix only
  std::uint64_t seed = 0;

  int size() const { return static_cast<int>(angles.size()); }
};

// lambda is only consulted for lambda_mix; seed only for random_grid and
// lambda_mix. lambda = 1 reproduces the equiangular half grid; lambda = 0 is
// sorted uniform draws on [0, pi).
AngleGrid make_angle_grid(GridKind kind, int n_angles, double lambda = 1.0,
                          std::uint64_t seed = 0);

// Detector evaluation points x_j, strictly interior to the unit ball of
// R^{dim}. For the planar case dim = 1 and points has one column.
struct DetectorMesh {
  Eigen::MatrixXd points;  // M x dim
  int dim = 1;

  int size() const { return static_cast<int>(points.rows()); }
  double offset(int j) const { return points(j, 0); }  // dim == 1
  Eigen::VectorXd point(int j) const { return points.row(j).transpose(); }
};

// Uniform cell-centered mesh on (-1, 1): x_j = -1 + (2j - 1) / M, j = 1..M.
DetectorMesh make_mesh(int n_points);

void validate(const DetectorMesh& mesh);

// N x M observation matrix y_ij = P_{phi_i} f(x_j) + noise.
struct Sinogram {
  Eigen::MatrixXd values;  // N x M
  AngleGrid grid;
  DetectorMesh mesh;
  double sigma = 0.0;
  std::uint64_t seed = 0;

  int n_angles() const { return static_cast<int>(values.rows()); }
  int n_mesh() const { return static_cast<int>(values.cols()); }
};

// Length of the chord cut from the ellipse by the ray with detector offset
// `offset` at viewing angle phi (ray direction (sin phi, cos phi), detector
// axis (cos phi, -sin phi)).
double ellipse_chord(const Ellipse& e, double phi, double offset);

// Exact line integrals of the phantom plus iid N(0, sigma^2) noise from the
// per-entry counter streams of `seed`. Identical (seed, config) pairs give
// bit-identical sinograms.
Sinogram simulate_sinogram(const Phantom& phantom, const AngleGrid& grid,
                           const DetectorMesh& mesh, double sigma,
                           std::uint64_t seed);

// --- file formats ---

// CSV layout: '#'-prefixed header lines (angles, mesh, sigma, seed, and
// optional provenance), then N rows of M comma-separated full-precision
// decimals.
void write_sinogram_csv(const Sinogram& s, const std::filesystem::path& path,
                        const std::string& config_hash = "");
Sinogram read_sinogram_csv(const std::filesystem::path& path);

void write_phantom_json(const Phantom& p, const std::filesystem::path& path);
Phantom read_phantom_json(const std::filesystem::path& path);

}  // namespace xrkhs
