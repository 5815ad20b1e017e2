#include "xrkhs/kernels.hpp"

#include <gsl/gsl_integration.h>

#include <cmath>
#include <stdexcept>

namespace xrkhs {

namespace {
constexpr double kPi = 3.14159265358979323846;
constexpr double kSqrtPi = 1.7724538509055160273;
}  // namespace

void validate(const GaussianKernelParams& p) {
  if (!(p.gamma > 0.0)) {
    throw std::invalid_argument("GaussianKernelParams: gamma must be > 0");
  }
  if (p.dim < 2) {
    throw std::invalid_argument("GaussianKernelParams: dim must be >= 2");
  }
}

QuadratureRule QuadratureRule::gauss_legendre(int order) {
  if (order < 1) throw std::invalid_argument("gauss_legendre: order < 1");
  // gsl_integration_fixed (Golub-Welsch) is machine accurate at every order;
  // the glfixed tables degrade to ~1e-10 outside their precomputed sizes.
  gsl_integration_fixed_workspace* ws = gsl_integration_fixed_alloc(
      gsl_integration_fixed_legendre, static_cast<size_t>(order), -1.0, 1.0,
      0.0, 0.0);
  if (ws == nullptr) throw std::runtime_error("gauss_legendre: allocation failed");
  QuadratureRule rule;
  rule.order = order;
  rule.nodes.assign(gsl_integration_fixed_nodes(ws),
                    gsl_integration_fixed_nodes(ws) + order);
  rule.weights.assign(gsl_integration_fixed_weights(ws),
                      gsl_integration_fixed_weights(ws) + order);
  gsl_integration_fixed_free(ws);
  return rule;
}

double error_function(double z) { return std::erf(z); }

double phi_antiderivative(double z) {
  return kSqrtPi * z * std::erf(z) + std::exp(-z * z) - 1.0;
}

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

// Bivariate normal CDF after Genz (2004), "Numerical computation of
// rectangular bivariate and trivariate normal and t probabilities", itself a
// refinement of Drezner & Wesolowsky. Gauss-Legendre panels on a transformed
// integrand; the |rho| > 0.925 branch integrates the near-singular part
// analytically. Double precision accuracy ~5e-16.
namespace {

double bvn_upper(double dh, double dk, double r) {
  // P(X > dh, Y > dk) for standard bivariate normal, correlation r.
  static const double w6[] = {0.1713244923791705, 0.3607615730481384,
                              0.4679139345726904};
  static const double x6[] = {0.9324695142031522, 0.6612093864662647,
                              0.2386191860831970};
  static const double w12[] = {0.04717533638651177, 0.1069393259953183,
                               0.1600783285433464,  0.2031674267230659,
                               0.2334925365383547,  0.2491470458134029};
  static const double x12[] = {0.9815606342467191, 0.9041172563704750,
                               0.7699026741943050, 0.5873179542866171,
                               0.3678314989981802, 0.1252334085114692};
  static const double w20[] = {
      0.01761400713915212, 0.04060142980038694, 0.06267204833410906,
      0.08327674157670475, 0.1019301198172404,  0.1181945319615184,
      0.1316886384491766,  0.1420961093183821,  0.1491729864726037,
      0.1527533871307259};
  static const double x20[] = {
      0.9931285991850949, 0.9639719272779138, 0.9122344282513259,
      0.8391169718222188, 0.7463319064601508, 0.6360536807265150,
      0.5108670019508271, 0.3737060887154196, 0.2277858511416451,
      0.07652652113349733};

  const double* w;
  const double* x;
  int ng;
  if (std::abs(r) < 0.3) {
    ng = 3;
    w = w6;
    x = x6;
  } else if (std::abs(r) < 0.75) {
    ng = 6;
    w = w12;
    x = x12;
  } else {
    ng = 10;
    w = w20;
    x = x20;
  }

  double h = dh, k = dk;
  double hk = h * k;
  double bvn = 0.0;

  if (std::abs(r) < 0.925) {
    if (std::abs(r) > 0) {
      const double hs = (h * h + k * k) / 2;
      const double asr = std::asin(r);
      for (int i = 0; i < ng; ++i) {
        for (int sign = -1; sign <= 1; sign += 2) {
          const double sn = std::sin(asr * (sign * x[i] + 1) / 2);
          bvn += w[i] * std::exp((sn * hk - hs) / (1 - sn * sn));
        }
      }
      bvn *= asr / (4 * kPi);
    }
    return bvn + normal_cdf(-h) * normal_cdf(-k);
  }

  if (r < 0) {
    k = -k;
    hk = -hk;
  }
  if (std::abs(r) < 1) {
    const double as = (1 - r) * (1 + r);
    double a = std::sqrt(as);
    const double bs = (h - k) * (h - k);
    const double c = (4 - hk) / 8;
    const double d = (12 - hk) / 16;
    double asq = -(bs / as + hk) / 2;
    if (asq > -100) {
      bvn = a * std::exp(asq) *
            (1 - c * (bs - as) * (1 - d * bs / 5) / 3 + c * d * as * as / 5);
    }
    if (-hk < 100) {
      const double b = std::sqrt(bs);
      bvn -= std::exp(-hk / 2) * std::sqrt(2 * kPi) * normal_cdf(-b / a) * b *
             (1 - c * bs * (1 - d * bs / 5) / 3);
    }
    a /= 2;
    for (int i = 0; i < ng; ++i) {
      for (int sign = -1; sign <= 1; sign += 2) {
        const double xs = a * (sign * x[i] + 1);
        const double xs2 = xs * xs;
        const double rs = std::sqrt(1 - xs2);
        asq = -(bs / xs2 + hk) / 2;
        if (asq > -100) {
          bvn += a * w[i] * std::exp(asq) *
                 (std::exp(-hk * (1 - rs) / (2 * (1 + rs))) / rs -
                  (1 + c * xs2 * (1 + d * xs2)));
        }
      }
    }
    bvn = -bvn / (2 * kPi);
  }
  if (r > 0) {
    return bvn + normal_cdf(-std::max(h, k));
  }
  bvn = -bvn;
  if (k > h) {
    bvn += normal_cdf(k) - normal_cdf(h);
  }
  return bvn;
}

}  // namespace

double bivariate_normal_cdf(double a, double b, double rho) {
  if (!(std::abs(rho) <= 1.0)) {
    throw std::invalid_argument("bivariate_normal_cdf: |rho| > 1");
  }
  if (std::abs(rho) > 1.0 - kParallelTol) {
    throw std::invalid_argument(
        "bivariate_normal_cdf: |rho| too close to 1; use the parallel branch");
  }
  return bvn_upper(-a, -b, rho);
}

namespace {

// Sum over the four sign combinations of Phi; shared by the induced kernel
// and the parallel Gram branch.
double phi_rect_sum(double sg, double W1, double W2) {
  return phi_antiderivative(sg * (W1 + W2)) -
         phi_antiderivative(sg * (W1 - W2)) -
         phi_antiderivative(sg * (-W1 + W2)) +
         phi_antiderivative(sg * (-W1 - W2));
}

double induced_kernel_impl(double gamma, double dist2, double W1, double W2) {
  if (W1 == 0.0 || W2 == 0.0) return 0.0;  // boundary generators vanish
  const double sg = std::sqrt(gamma);
  return std::exp(-gamma * dist2) / (2 * gamma) * phi_rect_sum(sg, W1, W2);
}

// The four-term bivariate CDF combination equals the probability of the
// rectangle [a1, a0] x [b1, b0]; skip the CDF calls when the rectangle
// carries no mass (Phi(-8.5) < 1e-17).
double bvn_rect_sum(double a0, double a1, double b0, double b1, double rho) {
  if (a0 <= -8.5 || b0 <= -8.5 || a1 >= 8.5 || b1 >= 8.5) return 0.0;
  return bivariate_normal_cdf(a0, b0, rho) - bivariate_normal_cdf(a0, b1, rho) -
         bivariate_normal_cdf(a1, b0, rho) + bivariate_normal_cdf(a1, b1, rho);
}

double cross_gram_impl(double gamma, const RelativeAngleData& rad,
                       double dist2_reduced, double W1, double W2) {
  if (W1 == 0.0 || W2 == 0.0) return 0.0;  // boundary generators vanish
  if (rad.parallel) {
    const double dist2 = dist2_reduced + rad.mu1 * rad.mu1;
    return induced_kernel_impl(gamma, dist2, W1, W2);
  }
  const double s2g = std::sqrt(2 * gamma);
  const double a0 = s2g * (rad.w_r * W1 - rad.mu1);
  const double a1 = s2g * (-rad.w_r * W1 - rad.mu1);
  const double b0 = s2g * (rad.w_r * W2 - rad.mu2);
  const double b1 = s2g * (-rad.w_r * W2 - rad.mu2);
  const double rect = bvn_rect_sum(a0, a1, b0, b1, rad.r);
  return kPi / (gamma * rad.w_r) * std::exp(-gamma * dist2_reduced) * rect;
}

}  // namespace

double induced_kernel(const GaussianKernelParams& p, const Eigen::VectorXd& x1,
                      const Eigen::VectorXd& x2) {
  if (x1.norm() > 1.0 + 1e-12 || x2.norm() > 1.0 + 1e-12) {
    throw std::invalid_argument("induced_kernel: point outside unit ball");
  }
  return induced_kernel_impl(p.gamma, (x1 - x2).squaredNorm(),
                             chord_half_point(x1), chord_half_point(x2));
}

double induced_kernel(const GaussianKernelParams& p, double x1, double x2) {
  if (std::abs(x1) > 1.0 + 1e-12 || std::abs(x2) > 1.0 + 1e-12) {
    throw std::invalid_argument("induced_kernel: point outside unit ball");
  }
  const double d = x1 - x2;
  return induced_kernel_impl(p.gamma, d * d, chord_half(x1), chord_half(x2));
}

double backprojected_generator(const GaussianKernelParams& p,
                               const Orientation& R, const Eigen::VectorXd& x,
                               const Eigen::VectorXd& z) {
  if (x.norm() > 1.0 + 1e-12 || z.norm() > 1.0 + 1e-12) {
    throw std::invalid_argument("backprojected_generator: point outside ball");
  }
  const Eigen::VectorXd Rz = R.matrix() * z;
  const int n = R.dim();
  const double proj_dist2 = (x - Rz.head(n - 1)).squaredNorm();
  const double zr = Rz(n - 1);  // z . (R^T e_n)
  const double Wx = chord_half_point(x);
  const double sg = std::sqrt(p.gamma);
  return kSqrtPi / (2 * sg) * std::exp(-p.gamma * proj_dist2) *
         (std::erf(sg * (Wx - zr)) - std::erf(sg * (-Wx - zr)));
}

double backprojected_generator(double gamma, double phi, double xj, double z1,
                               double z2) {
  const double c = std::cos(phi), s = std::sin(phi);
  const double zt = c * z1 - s * z2;  // detector coordinate of z
  const double zr = s * z1 + c * z2;  // coordinate along the ray axis
  const double g = gamma * (xj - zt) * (xj - zt);
  if (g > 60.0) return 0.0;  // exp(-60) ~ 9e-27: below double noise
  const double Wx = chord_half(xj);
  const double sg = std::sqrt(gamma);
  return kSqrtPi / (2 * sg) * std::exp(-g) *
         (std::erf(sg * (Wx - zr)) - std::erf(sg * (-Wx - zr)));
}

double cross_gram_entry(const GaussianKernelParams& p,
                        const RelativeAngleData& rad, const Eigen::VectorXd& x1,
                        const Eigen::VectorXd& x2) {
  return cross_gram_impl(p.gamma, rad, rad.dist2_reduced(),
                         chord_half_point(x1), chord_half_point(x2));
}

double cross_gram_entry(const GaussianKernelParams& p,
                        const RelativeAngleData& rad, double x1, double x2) {
  return cross_gram_impl(p.gamma, rad, 0.0, chord_half(x1), chord_half(x2));
}

double quadrature_gram_oracle(const KernelFn& kernel, const Orientation& R1,
                              const Orientation& R2, const Eigen::VectorXd& x1,
                              const Eigen::VectorXd& x2,
                              const QuadratureRule& rule) {
  const int n = R1.dim();
  const double W1 = chord_half_point(x1);
  const double W2 = chord_half_point(x2);
  const Eigen::MatrixXd R1t = R1.matrix().transpose();
  const Eigen::MatrixXd R2t = R2.matrix().transpose();
  Eigen::VectorXd v1(n), v2(n);
  v1.head(n - 1) = x1;
  v2.head(n - 1) = x2;

  // Pre-rotate the inner-loop points once per outer node.
  double total = 0.0;
  for (size_t j = 0; j < rule.nodes.size(); ++j) {
    v2(n - 1) = W2 * rule.nodes[j];
    const Eigen::VectorXd p2 = R2t * v2;
    double inner = 0.0;
    for (size_t i = 0; i < rule.nodes.size(); ++i) {
      v1(n - 1) = W1 * rule.nodes[i];
      inner += rule.weights[i] * kernel(R1t * v1, p2);
    }
    total += rule.weights[j] * W2 * inner * W1;
  }
  return total;
}

}  // namespace xrkhs
