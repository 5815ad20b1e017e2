#include "xrkhs/geometry.hpp"

#include <cmath>
#include <stdexcept>

#include "xrkhs/rng.hpp"

namespace xrkhs {

namespace {

constexpr double kOrthoTol = 1e-12;

// Planar rotation R^l_phi acting in the (l, l+1) plane, 1-based l.
Eigen::MatrixXd planar_rotation(int n, int l, double phi) {
  Eigen::MatrixXd R = Eigen::MatrixXd::Identity(n, n);
  const double c = std::cos(phi), s = std::sin(phi);
  R(l - 1, l - 1) = c;
  R(l - 1, l) = s;
  R(l, l - 1) = -s;
  R(l, l) = c;
  return R;
}

// E = R^{n-1}_{-phi_{n-1}} ... R^1_{-phi_1} for the given spherical angles.
Eigen::MatrixXd euler_from_angles(int n, const Eigen::VectorXd& phis) {
  Eigen::MatrixXd E = Eigen::MatrixXd::Identity(n, n);
  for (int l = n - 1; l >= 1; --l) {
    E = E * planar_rotation(n, l, -phis(l - 1));
  }
  return E;
}

}  // namespace

Orientation Orientation::from_angle(double phi) {
  return Orientation(2, phi, Eigen::MatrixXd());
}

Orientation Orientation::from_matrix(const Eigen::MatrixXd& m) {
  if (m.rows() != m.cols() || m.rows() < 2) {
    throw std::invalid_argument("Orientation: matrix must be n x n, n >= 2");
  }
  const int n = static_cast<int>(m.rows());
  const double ortho =
      (m * m.transpose() - Eigen::MatrixXd::Identity(n, n)).cwiseAbs().maxCoeff();
  if (ortho > kOrthoTol * 10 || std::abs(m.determinant() - 1.0) > 1e-10) {
    throw std::invalid_argument("Orientation: matrix is not a rotation");
  }
  if (n == 2) {
    return Orientation(2, std::atan2(m(1, 0), m(0, 0)), Eigen::MatrixXd());
  }
  return Orientation(n, 0.0, m);
}

Orientation Orientation::identity(int dim) {
  if (dim == 2) return from_angle(0.0);
  return Orientation(dim, 0.0, Eigen::MatrixXd::Identity(dim, dim));
}

double Orientation::angle() const {
  if (dim_ != 2) throw std::logic_error("Orientation::angle: dim != 2");
  return angle_;
}

Eigen::MatrixXd Orientation::matrix() const {
  if (dim_ == 2) {
    Eigen::MatrixXd m(2, 2);
    const double c = std::cos(angle_), s = std::sin(angle_);
    m << c, -s, s, c;
    return m;
  }
  return mat_;
}

Eigen::VectorXd Orientation::axis() const {
  if (dim_ == 2) {
    Eigen::VectorXd r(2);
    r << std::sin(angle_), std::cos(angle_);
    return r;
  }
  return mat_.row(mat_.rows() - 1).transpose();
}

Eigen::VectorXd spherical_angles(const Eigen::VectorXd& theta) {
  const int n = static_cast<int>(theta.size());
  Eigen::VectorXd phis = Eigen::VectorXd::Zero(n - 1);
  Eigen::VectorXd v = theta;
  for (int k = n - 1; k >= 2; --k) {
    const double c = std::clamp(v(k), -1.0, 1.0);
    const double phi = std::acos(c);
    phis(k - 1) = phi;
    const double s = std::sin(phi);
    if (s < 1e-14) {
      // degenerate pole: lower angles map to 0
      phis.head(k - 1).setZero();
      return phis;
    }
    v.head(k) /= s;
  }
  phis(0) = std::atan2(v(0), v(1));
  return phis;
}

Orientation euler_matrix(const Eigen::VectorXd& theta) {
  const int n = static_cast<int>(theta.size());
  if (n < 2) throw std::invalid_argument("euler_matrix: need dim >= 2");
  if (std::abs(theta.norm() - 1.0) > 1e-12) {
    throw std::invalid_argument("euler_matrix: theta must be a unit vector");
  }
  const Eigen::VectorXd phis = spherical_angles(theta);
  if (n == 2) return Orientation::from_angle(phis(0));
  return Orientation::from_matrix(euler_from_angles(n, phis));
}

std::pair<Eigen::MatrixXd, Eigen::VectorXd> euler_decompose(
    const Eigen::MatrixXd& R) {
  const int n = static_cast<int>(R.rows());
  const Eigen::VectorXd axis = R.row(n - 1).transpose();  // R^T e_n
  const Eigen::MatrixXd E = euler_matrix(axis).matrix();
  const Eigen::MatrixXd B = R * E.transpose();
  return {B.topLeftCorner(n - 1, n - 1), axis};
}

Eigen::VectorXd euclidean_project(const Orientation& R,
                                  const Eigen::VectorXd& z) {
  if (z.size() != R.dim()) {
    throw std::invalid_argument("euclidean_project: dimension mismatch");
  }
  if (R.is_planar()) {
    Eigen::VectorXd x(1);
    const double c = std::cos(R.angle()), s = std::sin(R.angle());
    x(0) = c * z(0) - s * z(1);
    return x;
  }
  return (R.matrix() * z).head(R.dim() - 1);
}

RelativeAngleData relative_angle_data(double phi1, double phi2, double x1,
                                      double x2) {
  // Planar reduction of the distance decomposition. With d = phi1 - phi2,
  // r = cos d and w = |sin d| > 0,
  //   ||[x1:z1] - E(d)[x2:z2]||^2 = (z - mu/w)^T [1 -r; -r 1] (z - mu/w)
  // holds with (mu1, mu2) = -sign(sin d) * (r x1 - x2, x1 - r x2); when
  // sin d = 0 the distance is (r x1 - x2)^2 + (z1 - r z2)^2. The Gram value
  // is invariant under the joint sign of (mu1, mu2).
  RelativeAngleData rad;
  const double d = phi1 - phi2;
  const double s = std::sin(d);
  const double sigma = s > 0.0 ? -1.0 : 1.0;
  rad.r = std::cos(d);
  rad.w_r = std::abs(s);
  rad.reduced_x1.resize(0);
  rad.reduced_x2.resize(0);
  rad.x1r = sigma * x1;
  rad.x2R = sigma * x2;
  rad.mu1 = rad.r * rad.x1r - rad.x2R;
  rad.mu2 = rad.x1r - rad.r * rad.x2R;
  rad.parallel = std::abs(rad.r) >= 1.0 - kParallelTol;
  return rad;
}

RelativeAngleData relative_angle_data(const Orientation& R1,
                                      const Orientation& R2,
                                      const Eigen::VectorXd& x1,
                                      const Eigen::VectorXd& x2) {
  const int n = R1.dim();
  if (R2.dim() != n || x1.size() != n - 1 || x2.size() != n - 1) {
    throw std::invalid_argument("relative_angle_data: dimension mismatch");
  }
  if (x1.norm() > 1.0 + 1e-12 || x2.norm() > 1.0 + 1e-12) {
    throw std::invalid_argument(
        "relative_angle_data: mesh points must lie in the unit ball");
  }
  if (n == 2) {
    return relative_angle_data(R1.angle(), R2.angle(), x1(0), x2(0));
  }

  // The Gram integrand contains (R1 R2^T)[x2:z2]; the distance decomposition
  // is taken through the Euler factorization of L = R2 R1^T, so that
  // L^T = R1 R2^T is the rotation actually applied to [x2:z2].
  const Eigen::MatrixXd L = R2.matrix() * R1.matrix().transpose();
  auto [Lt, axis] = euler_decompose(L);

  RelativeAngleData rad;
  rad.r = axis(n - 1);  // e_n^T L e_n = e_n^T L^T e_n
  rad.w_r = std::sqrt(std::max(0.0, 1.0 - rad.r * rad.r));
  rad.parallel = std::abs(rad.r) >= 1.0 - kParallelTol;

  // The reduction of x1 must reuse the lower spherical angles of the axis,
  // the same ones E(axis) is built from; axis = [sin(phi_{n-1}) r_tilde : r].
  const Eigen::VectorXd phis = spherical_angles(axis);
  const Eigen::VectorXd x1r = euler_from_angles(n - 1, phis.head(n - 2)) * x1;
  const Eigen::VectorXd x2R = Lt.transpose() * x2;
  rad.reduced_x1 = x1r.head(n - 2);
  rad.reduced_x2 = x2R.head(n - 2);
  rad.x1r = x1r(n - 2);
  rad.x2R = x2R(n - 2);
  rad.mu1 = rad.r * rad.x1r - rad.x2R;
  rad.mu2 = rad.x1r - rad.r * rad.x2R;
  return rad;
}

Orientation random_orientation(int dim, SplitMix64& rng) {
  if (dim == 2) {
    return Orientation::from_angle(rng.next_uniform() * 2.0 * 3.14159265358979323846);
  }
  Eigen::MatrixXd A(dim, dim);
  for (int r = 0; r < dim; ++r) {
    for (int c = 0; c < dim; ++c) A(r, c) = rng.next_normal();
  }
  const Eigen::HouseholderQR<Eigen::MatrixXd> qr(A);
  Eigen::MatrixXd Q = qr.householderQ();
  const Eigen::MatrixXd R = qr.matrixQR().triangularView<Eigen::Upper>();
  for (int c = 0; c < dim; ++c) {
    if (R(c, c) < 0) Q.col(c) = -Q.col(c);
  }
  if (Q.determinant() < 0) Q.col(0) = -Q.col(0);
  return Orientation::from_matrix(Q);
}

}  // namespace xrkhs
