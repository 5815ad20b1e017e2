#pragma once

#include <Eigen/Dense>
#include <functional>
#include <vector>

#include "xrkhs/geometry.hpp"

namespace xrkhs {

// Parameters of the Gaussian kernel K(z1, z2) = exp(-gamma ||z1 - z2||^2)
// on the unit ball of R^dim.
struct GaussianKernelParams {
  double gamma = 1.0;
  int dim = 2;
};

void validate(const GaussianKernelParams& p);

// Gauss-Legendre rule on [-1, 1]. Sum of weights is 2.
struct QuadratureRule {
  std::vector<double> nodes;
  std::vector<double> weights;
  int order = 0;

  static QuadratureRule gauss_legendre(int order);
};

// Weight function w(s) = sqrt(1 - s^2); half the chord length of the unit
// ball over a detector offset with |offset| = s. Clamped at the boundary so
// rounding cannot produce NaN.
inline double chord_half(double s) {
  return std::sqrt(std::max(0.0, 1.0 - s * s));
}
inline double chord_half_point(const Eigen::VectorXd& x) {
  return std::sqrt(std::max(0.0, 1.0 - x.squaredNorm()));
}

double error_function(double z);

// Phi(z) = sqrt(pi) * Integral_0^z erf = sqrt(pi) z erf(z) + exp(-z^2) - 1.
double phi_antiderivative(double z);

// Univariate standard normal CDF.
double normal_cdf(double z);

// P(Z1 <= a, Z2 <= b) for a standard bivariate normal pair with correlation
// rho. Absolute accuracy ~1e-15 (Gauss-Legendre method of Genz, 2004).
// Throws std::invalid_argument when |rho| > 1 - kParallelTol: callers must
// route near-parallel geometry to the parallel-case formula.
double bivariate_normal_cdf(double a, double b, double rho);

// Induced kernel on the detector ball,
//   Ktilde(x1, x2) = exp(-g||x1-x2||^2)/(2g)
//       * sum_{i,j} (-1)^{i+j} Phi[sqrt(g)((-1)^i W(x1) + (-1)^j W(x2))].
// Vanishes whenever either argument lies on the boundary sphere.
double induced_kernel(const GaussianKernelParams& p, const Eigen::VectorXd& x1,
                      const Eigen::VectorXd& x2);
double induced_kernel(const GaussianKernelParams& p, double x1, double x2);

// Backprojection of the induced generator at mesh point x, evaluated at
// z in the unit ball:
//   (sqrt(pi)/(2 sqrt(g))) exp(-g||x - P_R z||^2)
//       * [erf(sqrt(g)(W(x) - z.r)) - erf(sqrt(g)(-W(x) - z.r))].
double backprojected_generator(const GaussianKernelParams& p,
                               const Orientation& R, const Eigen::VectorXd& x,
                               const Eigen::VectorXd& z);
// Planar fast path (n = 2): orientation angle phi, mesh offset xj,
// evaluation point (z1, z2).
double backprojected_generator(double gamma, double phi, double xj, double z1,
                               double z2);

// Closed-form Gram entry
//   Integral over I_{||x2||} x I_{||x1||} of K([x1:u], (R1 R2^T)[x2:v]) du dv
// evaluated from the relative-angle reduction `rad` (which must have been
// computed from the same x1, x2). Parallel branch uses the Phi sum; the
// generic branch uses four bivariate normal CDF evaluations.
double cross_gram_entry(const GaussianKernelParams& p,
                        const RelativeAngleData& rad, const Eigen::VectorXd& x1,
                        const Eigen::VectorXd& x2);
double cross_gram_entry(const GaussianKernelParams& p,
                        const RelativeAngleData& rad, double x1, double x2);

using KernelFn =
    std::function<double(const Eigen::VectorXd&, const Eigen::VectorXd&)>;

inline KernelFn gaussian_kernel_fn(double gamma) {
  return [gamma](const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
    return std::exp(-gamma * (a - b).squaredNorm());
  };
}

// Tensor-product quadrature of
//   Integral K(R1^T [x1:u], R2^T [x2:v]) du dv
// over I_{||x1||} x I_{||x2||}; the independent oracle for the closed forms.
double quadrature_gram_oracle(const KernelFn& kernel, const Orientation& R1,
                              const Orientation& R2, const Eigen::VectorXd& x1,
                              const Eigen::VectorXd& x2,
                              const QuadratureRule& rule);

}  // namespace xrkhs
