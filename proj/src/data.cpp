#include "xrkhs/data.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "xrkhs/rng.hpp"

namespace xrkhs {

namespace {
constexpr double kPi = 3.14159265358979323846;

// stream ids for the per-purpose counter streams of a seed
constexpr std::uint64_t kStreamAngles = 0x414E474C45u;  // "ANGLE"
constexpr std::uint64_t kStreamNoiseBase = 1u << 20;

std::string format_full(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}
}  // namespace

double Phantom::value_at(double z1, double z2) const {
  double v = 0.0;
  for (const Ellipse& e : ellipses) {
    const double dx = z1 - e.center(0);
    const double dy = z2 - e.center(1);
    const double c = std::cos(e.rotation), s = std::sin(e.rotation);
    const double u = (c * dx + s * dy) / e.semi_axes(0);
    const double w = (-s * dx + c * dy) / e.semi_axes(1);
    if (u * u + w * w <= 1.0) v += e.intensity;
  }
  return v * scale;
}

Phantom shepp_logan() {
  // Shepp & Logan (1974) head section, intensities in the original contrast.
  Phantom p;
  p.scale = 10.0;
  const double deg = kPi / 180.0;
  auto add = [&p, deg](double x0, double y0, double a, double b, double phi_deg,
                       double val) {
    Ellipse e;
    e.center << x0, y0;
    e.semi_axes << a, b;
    e.rotation = phi_deg * deg;
    e.intensity = val;
    p.ellipses.push_back(e);
  };
  add(0.0, 0.0, 0.69, 0.92, 0.0, 2.0);
  add(0.0, -0.0184, 0.6624, 0.874, 0.0, -0.98);
  add(0.22, 0.0, 0.11, 0.31, -18.0, -0.02);
  add(-0.22, 0.0, 0.16, 0.41, 18.0, -0.02);
  add(0.0, 0.35, 0.21, 0.25, 0.0, 0.01);
  add(0.0, 0.1, 0.046, 0.046, 0.0, 0.01);
  add(0.0, -0.1, 0.046, 0.046, 0.0, 0.01);
  add(-0.08, -0.605, 0.046, 0.023, 0.0, 0.01);
  add(0.0, -0.606, 0.023, 0.023, 0.0, 0.01);
  add(0.06, -0.605, 0.023, 0.046, 0.0, 0.01);
  validate(p);
  return p;
}

void validate(const Phantom& p) {
  for (const Ellipse& e : p.ellipses) {
    if (!(e.semi_axes(0) > 0) || !(e.semi_axes(1) > 0)) {
      throw std::invalid_argument("Phantom: non-positive semi-axis");
    }
    // Farthest point of the ellipse from the origin is bounded by
    // ||center|| + max semi-axis.
    const double reach = e.center.norm() + e.semi_axes.maxCoeff();
    if (reach > 1.0 + 1e-12) {
      throw std::invalid_argument("Phantom: ellipse leaves the unit disk");
    }
  }
}

AngleGrid make_angle_grid(GridKind kind, int n_angles, double lambda,
                          std::uint64_t seed) {
  if (n_angles < 1) throw std::invalid_argument("make_angle_grid: N < 1");
  if (lambda < 0.0 || lambda > 1.0) {
    throw std::invalid_argument("make_angle_grid: lambda outside [0, 1]");
  }
  AngleGrid g;
  g.kind = kind;
  g.lambda = lambda;
  g.seed = seed;
  g.angles.resize(n_angles);
  switch (kind) {
    case GridKind::equiangular_full:
      for (int i = 0; i < n_angles; ++i) {
        g.angles[i] = 2.0 * kPi * i / n_angles;
      }
      break;
    case GridKind::equiangular_half:
      for (int i = 0; i < n_angles; ++i) {
        g.angles[i] = kPi * i / n_angles;
      }
      break;
    case GridKind::random_grid:
    case GridKind::lambda_mix: {
      SplitMix64 rng(seed, kStreamAngles);
      std::vector<double> u(n_angles);
      for (double& v : u) v = rng.next_uniform();
      std::sort(u.begin(), u.end());
      const double lam = (kind == GridKind::random_grid) ? 0.0 : lambda;
      for (int j = 0; j < n_angles; ++j) {
        g.angles[j] = (1.0 - lam) * kPi * u[j] + lam * kPi * j / n_angles;
      }
      break;
    }
  }
  return g;
}

DetectorMesh make_mesh(int n_points) {
  if (n_points < 1) throw std::invalid_argument("make_mesh: M < 1");
  DetectorMesh mesh;
  mesh.dim = 1;
  mesh.points.resize(n_points, 1);
  for (int j = 1; j <= n_points; ++j) {
    mesh.points(j - 1, 0) = -1.0 + (2.0 * j - 1.0) / n_points;
  }
  validate(mesh);
  return mesh;
}

void validate(const DetectorMesh& mesh) {
  for (int j = 0; j < mesh.size(); ++j) {
    if (mesh.points.row(j).norm() > 1.0 - kBoundaryMargin) {
      throw std::invalid_argument(
          "DetectorMesh: mesh point within the boundary margin of the unit "
          "sphere (such a point contributes a zero Gram row)");
    }
  }
}

double ellipse_chord(const Ellipse& e, double phi, double offset) {
  // Ray: p(t) = offset * (cos phi, -sin phi) + t * (sin phi, cos phi).
  // Map into the frame where the ellipse is the unit circle and solve the
  // quadratic |A + t B|^2 = 1.
  const double c = std::cos(phi), s = std::sin(phi);
  const Eigen::Vector2d p0(offset * c, -offset * s);
  const Eigen::Vector2d dir(s, c);
  const double ce = std::cos(e.rotation), se = std::sin(e.rotation);
  Eigen::Matrix2d to_frame;
  to_frame << ce, se, -se, ce;  // rotate by -e.rotation
  const Eigen::Vector2d A =
      (to_frame * (p0 - e.center)).cwiseQuotient(e.semi_axes);
  const Eigen::Vector2d B = (to_frame * dir).cwiseQuotient(e.semi_axes);
  const double bb = B.squaredNorm();
  const double ab = A.dot(B);
  const double disc = ab * ab - bb * (A.squaredNorm() - 1.0);
  if (disc <= 0.0) return 0.0;
  return 2.0 * std::sqrt(disc) / bb;
}

Sinogram simulate_sinogram(const Phantom& phantom, const AngleGrid& grid,
                           const DetectorMesh& mesh, double sigma,
                           std::uint64_t seed) {
  if (mesh.dim != 1) {
    throw std::invalid_argument("simulate_sinogram: planar geometry only");
  }
  validate(phantom);
  const int N = grid.size();
  const int M = mesh.size();
  Sinogram s;
  s.grid = grid;
  s.mesh = mesh;
  s.sigma = sigma;
  s.seed = seed;
  s.values.resize(N, M);
#pragma omp parallel for schedule(static)
  for (int i = 0; i < N; ++i) {
    for (int j = 0; j < M; ++j) {
      double v = 0.0;
      for (const Ellipse& e : phantom.ellipses) {
        v += e.intensity * ellipse_chord(e, grid.angles[i], mesh.offset(j));
      }
      v *= phantom.scale;
      if (sigma > 0.0) {
        SplitMix64 stream(seed,
                          kStreamNoiseBase + static_cast<std::uint64_t>(i) * M + j);
        v += sigma * stream.next_normal();
      }
      s.values(i, j) = v;
    }
  }
  return s;
}

void write_sinogram_csv(const Sinogram& s, const std::filesystem::path& path,
                        const std::string& config_hash) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path.string());
  out << "# angles:";
  for (double a : s.grid.angles) out << ' ' << format_full(a);
  out << "\n# mesh:";
  for (int j = 0; j < s.mesh.size(); ++j) out << ' ' << format_full(s.mesh.offset(j));
  out << "\n# sigma: " << format_full(s.sigma);
  out << "\n# seed: " << s.seed;
  if (!config_hash.empty()) out << "\n# config: " << config_hash;
  out << '\n';
  for (int i = 0; i < s.n_angles(); ++i) {
    for (int j = 0; j < s.n_mesh(); ++j) {
      if (j) out << ',';
      out << format_full(s.values(i, j));
    }
    out << '\n';
  }
}

Sinogram read_sinogram_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  Sinogram s;
  std::vector<double> angles, mesh_pts;
  std::vector<std::vector<double>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (line[0] == '#') {
      std::istringstream iss(line.substr(1));
      std::string key;
      iss >> key;
      if (key == "angles:") {
        double v;
        while (iss >> v) angles.push_back(v);
      } else if (key == "mesh:") {
        double v;
        while (iss >> v) mesh_pts.push_back(v);
      } else if (key == "sigma:") {
        iss >> s.sigma;
      } else if (key == "seed:") {
        iss >> s.seed;
      }
      continue;
    }
    std::vector<double> row;
    std::istringstream iss(line);
    std::string cell;
    while (std::getline(iss, cell, ',')) row.push_back(std::stod(cell));
    rows.push_back(std::move(row));
  }
  if (angles.empty() || mesh_pts.empty() || rows.empty()) {
    throw std::runtime_error("malformed sinogram csv: " + path.string());
  }
  const int N = static_cast<int>(rows.size());
  const int M = static_cast<int>(rows[0].size());
  if (N != static_cast<int>(angles.size()) ||
      M != static_cast<int>(mesh_pts.size())) {
    throw std::runtime_error("sinogram csv dimensions disagree with header");
  }
  s.grid.angles = angles;
  s.grid.kind = GridKind::random_grid;  // kind is not round-tripped
  s.mesh.dim = 1;
  s.mesh.points.resize(M, 1);
  for (int j = 0; j < M; ++j) s.mesh.points(j, 0) = mesh_pts[j];
  s.values.resize(N, M);
  for (int i = 0; i < N; ++i) {
    if (static_cast<int>(rows[i].size()) != M) {
      throw std::runtime_error("sinogram csv has ragged rows");
    }
    for (int j = 0; j < M; ++j) s.values(i, j) = rows[i][j];
  }
  return s;
}

void write_phantom_json(const Phantom& p, const std::filesystem::path& path) {
  nlohmann::json j;
  j["scale"] = p.scale;
  j["ellipses"] = nlohmann::json::array();
  for (const Ellipse& e : p.ellipses) {
    j["ellipses"].push_back({{"center", {e.center(0), e.center(1)}},
                             {"semi_axes", {e.semi_axes(0), e.semi_axes(1)}},
                             {"rotation", e.rotation},
                             {"intensity", e.intensity}});
  }
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path.string());
  out << j.dump(2) << '\n';
}

Phantom read_phantom_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  nlohmann::json j;
  in >> j;
  Phantom p;
  p.scale = j.at("scale").get<double>();
  for (const auto& je : j.at("ellipses")) {
    Ellipse e;
    e.center << je.at("center")[0].get<double>(), je.at("center")[1].get<double>();
    e.semi_axes << je.at("semi_axes")[0].get<double>(),
        je.at("semi_axes")[1].get<double>();
    e.rotation = je.at("rotation").get<double>();
    e.intensity = je.at("intensity").get<double>();
    p.ellipses.push_back(e);
  }
  validate(p);
  return p;
}

}  // namespace xrkhs
