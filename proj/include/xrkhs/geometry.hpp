#pragma once

#include <Eigen/Dense>

namespace xrkhs {

// Orientations with |r| >= 1 - kParallelTol relative-axis cosine are routed
// to the parallel-case Gram formula; below that the bivariate-normal branch
// is numerically safe.
inline constexpr double kParallelTol = 1e-8;

// A viewing orientation: an element of SO(n). For n == 2 only the planar
// angle phi is stored (R = [[cos, -sin], [sin, cos]]); for n >= 3 the full
// matrix is stored. Immutable after construction.
class Orientation {
 public:
  // n == 2 rotation by phi.
  static Orientation from_angle(double phi);
  // General n; validates orthogonality and det = +1 to 1e-12.
  static Orientation from_matrix(const Eigen::MatrixXd& m);
  static Orientation identity(int dim);

  int dim() const { return dim_; }
  bool is_planar() const { return dim_ == 2; }
  // Planar angle; only valid when dim() == 2.
  double angle() const;
  // Rotation matrix (materialized on demand for n == 2).
  Eigen::MatrixXd matrix() const;
  // Axis of orientation r = R^T e_n.
  Eigen::VectorXd axis() const;

 private:
  Orientation(int dim, double phi, Eigen::MatrixXd m)
      : dim_(dim), angle_(phi), mat_(std::move(m)) {}

  int dim_;
  double angle_ = 0.0;   // n == 2 only
  Eigen::MatrixXd mat_;  // empty for n == 2
};

// Spherical coordinates (phi_1, ..., phi_{n-1}) of a unit vector,
// phi_1 in [-pi, pi), the rest in [0, pi]. At a degenerate pole
// (sin phi_k = 0) all lower angles are set to 0.
Eigen::VectorXd spherical_angles(const Eigen::VectorXd& theta);

// Euler rotation E(theta), the product of planar rotations
// R^{n-1}_{-phi_{n-1}} ... R^1_{-phi_1}, satisfying E(theta)^T e_n = theta.
// Throws std::invalid_argument unless ||theta|| = 1 within 1e-12.
Orientation euler_matrix(const Eigen::VectorXd& theta);

// Factors R = [Rtilde 0; 0 1] * E(axis) with axis = R^T e_n.
// Returns (Rtilde, axis); Rtilde is (n-1)x(n-1).
std::pair<Eigen::MatrixXd, Eigen::VectorXd> euler_decompose(
    const Eigen::MatrixXd& R);

// First n-1 coordinates of R z (the detector-plane coordinates of z).
Eigen::VectorXd euclidean_project(const Orientation& R,
                                  const Eigen::VectorXd& z);

// Everything the closed-form Gram entry needs about a pair of orientations
// and mesh points. The fields decompose the squared distance inside the
// kernel integrand,
//   ||[x1:z1] - (R1 R2^T)[x2:z2]||^2
//     = dist2_reduced(+ mu1^2 when parallel) + quadratic form in (z1, z2),
// see relative_angle_data() for the exact two branches.
struct RelativeAngleData {
  double r = 1.0;    // e_n^T (R1 R2^T) e_n, the relative-axis cosine
  double w_r = 0.0;  // sqrt(1 - r^2)
  Eigen::VectorXd reduced_x1;  // (n-2)-vector
  Eigen::VectorXd reduced_x2;  // (n-2)-vector
  double x1r = 0.0;
  double x2R = 0.0;
  double mu1 = 0.0;  // r * x1r - x2R
  double mu2 = 0.0;  // x1r - r * x2R
  bool parallel = true;

  double dist2_reduced() const {
    return (reduced_x1 - reduced_x2).squaredNorm();
  }
};

// General-n reduction (n >= 3 uses the Euler decomposition; n == 2 takes the
// planar fast path). x1, x2 must lie in the closed unit ball of R^{n-1}.
RelativeAngleData relative_angle_data(const Orientation& R1,
                                      const Orientation& R2,
                                      const Eigen::VectorXd& x1,
                                      const Eigen::VectorXd& x2);

// Planar fast path: orientations given by angles phi1, phi2, mesh points are
// scalars in [-1, 1].
RelativeAngleData relative_angle_data(double phi1, double phi2, double x1,
                                      double x2);

class SplitMix64;

// Haar-distributed rotation (QR of a Gaussian matrix with sign fix).
Orientation random_orientation(int dim, SplitMix64& rng);

}  // namespace xrkhs
