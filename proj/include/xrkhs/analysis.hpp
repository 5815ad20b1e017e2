#pragma once

#include <Eigen/Dense>

#include "xrkhs/recon.hpp"

namespace xrkhs {

// ||sum_ij alpha_ij P* ktilde||_H^2 = alpha^T W alpha: reconstruction norms
// are always computed through Gram algebra, never raster integration.
double hnorm2(const GramMatrix& gram, const Eigen::VectorXd& alpha);

// Worst-case squared reconstruction error over ||f0||_H <= rho and noise
// norm <= eps: bound = rho^2 + eps^2 / (d + 2 nu) with d the smallest
// nonzero Gram eigenvalue.
struct StabilityReport {
  double rho = 0.0;
  double eps = 0.0;
  double nu = 0.0;
  double d = 0.0;
  double bound = 0.0;
  double achieved = 0.0;  // filled by adversarial_instance
  double gap = 0.0;       // bound - achieved
};

StabilityReport stability_bound(const GramMatrix& gram, double nu, double rho,
                                double eps);

// The equality-achieving pair along the eigenvector of d: signal
// coefficients c * u_d with c = nu*eps/(d(d+2nu)), noise -eps * u_d, and the
// remaining rho budget placed in the orthogonal complement of the
// identifiable space (kept as a scalar, since it has no finite coefficient
// representation). When rho cannot fund the full signal component
// (rho < nu*eps/(sqrt(d)(d+2nu))), c is capped at rho/sqrt(d) and the
// instance attains the bound only up to a factor d(d+2nu)/(d+nu)^2, which
// approaches 1 as nu -> 0.
struct AdversarialInstance {
  Eigen::VectorXd alpha0;
  Eigen::VectorXd noise;
  double perp_norm2 = 0.0;  // ||f0 - P f0||_H^2 component of the budget
  StabilityReport report;
};

AdversarialInstance adversarial_instance(const GramMatrix& gram, double nu,
                                         double rho, double eps);

// Closed-form mean squared H-error of the ridge solution at penalty nu for
// a true signal with coefficients alpha0 and iid N(0, sigma^2) observation
// noise; projection_residual is ||f0 - P f0||_H^2, zero when f0 lies in the
// identifiable span.
struct MseReport {
  double bias_term = 0.0;
  double variance_term = 0.0;
  double projection_term = 0.0;
  double total = 0.0;
};

MseReport mse_decomposition(const GramMatrix& gram, double nu,
                            const Eigen::VectorXd& alpha0, double sigma,
                            double projection_residual);

// Root mean squared pixel difference over the pixels inside the unit disk.
double rmse(const ImageRaster& recon, const ImageRaster& truth);

// CSV serialization of stability reports:
// config,rho,eps,nu,d,bound,achieved
std::string stability_csv_header();
std::string stability_csv_row(const StabilityReport& rep,
                              const std::string& config_hash);

}  // namespace xrkhs
