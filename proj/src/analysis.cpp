#include "xrkhs/analysis.hpp"

#include <cmath>
#include <stdexcept>

namespace xrkhs {

double hnorm2(const GramMatrix& gram, const Eigen::VectorXd& alpha) {
  return alpha.dot(gram.multiply(alpha));
}

StabilityReport stability_bound(const GramMatrix& gram, double nu, double rho,
                                double eps) {
  if (!(nu > 0.0) || rho < 0.0 || eps < 0.0) {
    throw std::invalid_argument("stability_bound: need nu > 0, rho, eps >= 0");
  }
  StabilityReport rep;
  rep.rho = rho;
  rep.eps = eps;
  rep.nu = nu;
  rep.d = gram_spectrum(gram).smallest_nonzero;
  rep.bound = rho * rho + eps * eps / (rep.d + 2.0 * nu);
  return rep;
}

AdversarialInstance adversarial_instance(const GramMatrix& gram, double nu,
                                         double rho, double eps) {
  if (!(nu > 0.0) || rho < 0.0 || eps < 0.0) {
    throw std::invalid_argument(
        "adversarial_instance: need nu > 0, rho, eps >= 0");
  }
  const Eigen::MatrixXd W = gram.to_dense();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(W);
  if (es.info() != Eigen::Success) {
    throw std::runtime_error("adversarial_instance: eigendecomposition failed");
  }
  const Eigen::VectorXd& evals = es.eigenvalues();
  const double largest = evals(evals.size() - 1);
  if (!(largest > 0.0)) {
    throw std::runtime_error("adversarial_instance: rank zero Gram matrix");
  }
  int kd = -1;
  for (int k = 0; k < evals.size(); ++k) {
    if (evals(k) > kRankTol * largest) {
      kd = k;
      break;
    }
  }
  const double d = evals(kd);
  const Eigen::VectorXd u = es.eigenvectors().col(kd);

  // Equality in the ridge-shrinkage inequality requires the noise and signal
  // components along u to satisfy v = -d(d+2nu) w / nu; the eps budget then
  // fixes the signal magnitude c, capped by what the rho budget can fund.
  const double c =
      std::min(nu * eps / (d * (d + 2.0 * nu)), rho / std::sqrt(d));
  const double rho_used2 = d * c * c;

  AdversarialInstance inst;
  inst.alpha0 = c * u;
  inst.noise = -eps * u;  // = -c d (d+2nu)/nu * u, normalized to ||noise|| = eps
  inst.perp_norm2 = std::max(0.0, rho * rho - rho_used2);

  const int N = std::max(1, gram.n_angles);
  const int M = gram.size() / N;
  Sinogram obs;
  obs.grid = gram.grid;
  obs.mesh = gram.mesh;
  obs.values.resize(N, M);
  const Eigen::VectorXd y = W * inst.alpha0 + inst.noise;
  for (int i = 0; i < N; ++i) {
    obs.values.row(i) = y.segment(i * M, M).transpose();
  }
  GramMatrix dense_view = gram;
  if (dense_view.layout != GramLayout::dense) {
    dense_view.dense = W;
    dense_view.layout = GramLayout::dense;
  }
  const CoefficientField fit = solve_tikhonov(dense_view, obs, nu);
  const Eigen::VectorXd diff = fit.vec() - inst.alpha0;
  const double achieved = diff.dot(W * diff) + inst.perp_norm2;

  inst.report.rho = rho;
  inst.report.eps = eps;
  inst.report.nu = nu;
  inst.report.d = d;
  inst.report.bound = rho * rho + eps * eps / (d + 2.0 * nu);
  inst.report.achieved = achieved;
  inst.report.gap = inst.report.bound - achieved;
  return inst;
}

MseReport mse_decomposition(const GramMatrix& gram, double nu,
                            const Eigen::VectorXd& alpha0, double sigma,
                            double projection_residual) {
  if (!(nu > 0.0)) throw std::invalid_argument("mse_decomposition: nu <= 0");
  if (sigma < 0.0) throw std::invalid_argument("mse_decomposition: sigma < 0");
  const Eigen::MatrixXd W = gram.to_dense();
  if (alpha0.size() != W.rows()) {
    throw std::invalid_argument("mse_decomposition: alpha0 size mismatch");
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(W);
  const Eigen::VectorXd& d = es.eigenvalues();
  const Eigen::VectorXd w = es.eigenvectors().transpose() * alpha0;
  MseReport rep;
  for (int k = 0; k < d.size(); ++k) {
    const double denom = (d(k) + nu) * (d(k) + nu);
    rep.bias_term += nu * nu * d(k) * w(k) * w(k) / denom;
    rep.variance_term += sigma * sigma * d(k) / denom;
  }
  rep.projection_term = projection_residual;
  rep.total = rep.bias_term + rep.variance_term + rep.projection_term;
  return rep;
}

double rmse(const ImageRaster& recon, const ImageRaster& truth) {
  if (recon.side != truth.side) {
    throw std::invalid_argument("rmse: raster geometry mismatch");
  }
  double acc = 0.0;
  long count = 0;
  for (int row = 0; row < recon.side; ++row) {
    for (int col = 0; col < recon.side; ++col) {
      if (!recon.inside(row, col)) continue;
      const double d = recon.values(row, col) - truth.values(row, col);
      acc += d * d;
      ++count;
    }
  }
  if (count == 0) throw std::invalid_argument("rmse: empty raster");
  return std::sqrt(acc / count);
}

std::string stability_csv_header() { return "config,rho,eps,nu,d,bound,achieved"; }

std::string stability_csv_row(const StabilityReport& rep,
                              const std::string& config_hash) {
  char buf[256];
  std::snprintf(buf, sizeof(buf), "%s,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g",
                config_hash.c_str(), rep.rho, rep.eps, rep.nu, rep.d, rep.bound,
                rep.achieved);
  return buf;
}

}  // namespace xrkhs
