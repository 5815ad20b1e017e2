// Command-line front end: simulate sinograms, precompute Gram caches, run
// kernel and FBP reconstructions, sweep benchmark grids, and verify the
// numerical guarantees end to end.
//
// Exit codes: 0 success, 1 usage, 2 data error, 3 numerical-verification
// failure.

#include <CLI11.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "xrkhs/analysis.hpp"
#include "xrkhs/fbp.hpp"
#include "xrkhs/rng.hpp"
#include "xrkhs/verify.hpp"

namespace {

using namespace xrkhs;

constexpr double kPi = 3.14159265358979323846;

// Accepts plain decimals and the exponent notation 2^k (k may be negative),
// matching how the parameter grids are usually quoted.
double parse_real(const std::string& text) {
  const auto caret = text.find('^');
  if (caret != std::string::npos) {
    const double base = std::stod(text.substr(0, caret));
    const double expo = std::stod(text.substr(caret + 1));
    return std::pow(base, expo);
  }
  return std::stod(text);
}

// "a,b,c" lists plus "2^lo..2^hi" ranges stepping the exponent by one.
std::vector<double> parse_real_list(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto dots = item.find("..");
    if (dots != std::string::npos) {
      const std::string lo = item.substr(0, dots);
      const std::string hi = item.substr(dots + 2);
      const auto c1 = lo.find('^'), c2 = hi.find('^');
      if (c1 == std::string::npos || c2 == std::string::npos) {
        throw CLI::ValidationError("range syntax requires base^lo..base^hi");
      }
      const double base = std::stod(lo.substr(0, c1));
      const int e1 = std::stoi(lo.substr(c1 + 1));
      const int e2 = std::stoi(hi.substr(c2 + 1));
      for (int e = std::min(e1, e2); e <= std::max(e1, e2); ++e) {
        out.push_back(std::pow(base, e));
      }
    } else if (!item.empty()) {
      out.push_back(parse_real(item));
    }
  }
  return out;
}

std::string hash_hex(const std::string& canonical) {
  std::uint64_t h = 0xcbf29ce484222325ULL;  // FNV-1a
  for (unsigned char c : canonical) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

GridKind parse_grid_kind(const std::string& name) {
  if (name == "equi") return GridKind::equiangular_half;
  if (name == "full") return GridKind::equiangular_full;
  if (name == "random") return GridKind::random_grid;
  if (name == "lambda") return GridKind::lambda_mix;
  throw CLI::ValidationError("--grid must be one of equi|full|random|lambda");
}

bool is_full_circle_equiangular(const AngleGrid& grid) {
  const int N = grid.size();
  for (int i = 0; i < N; ++i) {
    if (std::abs(grid.angles[i] - 2.0 * kPi * i / N) > 1e-9) return false;
  }
  return true;
}

struct Stopwatch {
  std::chrono::steady_clock::time_point t0 = std::chrono::steady_clock::now();
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
        .count();
  }
};

void report_timing(const Stopwatch& watch) {
  std::printf("wall time: %.3f s (%u hardware threads)\n", watch.seconds(),
              std::max(1u, std::thread::hardware_concurrency()));
}

int cmd_phantom(int size, const std::string& out, const std::string& csv,
                const std::string& phantom_json, const std::string& table_out) {
  const Phantom phantom =
      phantom_json.empty() ? shepp_logan() : read_phantom_json(phantom_json);
  const std::string cfg = hash_hex("phantom|" + std::to_string(size));
  const ImageRaster img = rasterize(phantom, size);
  write_pgm(img, out, "config=" + cfg);
  if (!csv.empty()) write_raster_csv(img, csv);
  if (!table_out.empty()) write_phantom_json(phantom, table_out);
  std::printf("phantom raster %dx%d -> %s (config %s)\n", size, size,
              out.c_str(), cfg.c_str());
  return 0;
}

int cmd_sinogram(int n, int m, const std::string& grid_name, double lambda,
                 double sigma, std::uint64_t seed, const std::string& out,
                 const std::string& phantom_json) {
  const Phantom phantom =
      phantom_json.empty() ? shepp_logan() : read_phantom_json(phantom_json);
  const AngleGrid grid = make_angle_grid(parse_grid_kind(grid_name), n, lambda, seed);
  const DetectorMesh mesh = make_mesh(m);
  const Sinogram sino = simulate_sinogram(phantom, grid, mesh, sigma, seed);
  const std::string cfg = hash_hex("sinogram|" + std::to_string(n) + "|" +
                                   std::to_string(m) + "|" + grid_name + "|" +
                                   std::to_string(lambda) + "|" +
                                   std::to_string(sigma) + "|" +
                                   std::to_string(seed));
  write_sinogram_csv(sino, out, cfg);
  std::printf("sinogram %dx%d sigma=%g -> %s (config %s)\n", n, m, sigma,
              out.c_str(), cfg.c_str());
  return 0;
}

int cmd_gram(double gamma, const std::string& layout, const std::string& sino_path,
             int n, int m, const std::string& grid_name, double lambda,
             std::uint64_t seed, double factor_nu, const std::string& out) {
  Stopwatch watch;
  AngleGrid grid;
  DetectorMesh mesh;
  if (!sino_path.empty()) {
    const Sinogram sino = read_sinogram_csv(sino_path);
    grid = sino.grid;
    mesh = sino.mesh;
  } else {
    grid = make_angle_grid(parse_grid_kind(grid_name), n, lambda, seed);
    mesh = make_mesh(m);
  }
  const GaussianKernelParams params{gamma, 2};
  GramMatrix gram;
  if (layout == "circulant") {
    if (!is_full_circle_equiangular(grid)) {
      throw std::runtime_error(
          "circulant layout requires the equiangular full-circle grid "
          "(--grid full); other grids use the dense layout");
    }
    gram = assemble_circulant(params, grid.size(), mesh);
  } else if (layout == "dense") {
    gram = assemble_dense(params, grid, mesh);
  } else {
    throw CLI::ValidationError("--layout must be dense|circulant");
  }
  save_gram(gram, out);
  if (factor_nu > 0.0) {
    append_factor_cache(build_factor_cache(gram, factor_nu), out);
  }
  std::printf("gram %s N=%d M=%d gamma=%g -> %s%s\n", layout.c_str(),
              gram.n_angles, gram.n_mesh, gamma, out.c_str(),
              factor_nu > 0 ? " (+factor cache)" : "");
  report_timing(watch);
  return 0;
}

int cmd_reconstruct_kr(const std::string& sino_path, double gamma, double nu,
                       bool circulant, const std::string& gram_path, int size,
                       const std::string& out, const std::string& csv,
                       const std::string& truth_csv) {
  Stopwatch watch;
  const Sinogram sino = read_sinogram_csv(sino_path);
  GramMatrix gram;
  std::optional<FactorCache> cache;
  if (!gram_path.empty()) {
    gram = load_gram(gram_path);
    if (gram.n_angles != sino.n_angles() || gram.n_mesh != sino.n_mesh()) {
      throw std::runtime_error("gram cache does not match the sinogram grids");
    }
    if (gamma > 0.0 && std::abs(gram.params.gamma - gamma) > 1e-12) {
      throw std::runtime_error("gram cache was built for a different gamma");
    }
    cache = load_factor_cache(gram_path);
    if (cache && cache->nu != nu) cache.reset();
  } else {
    if (!(gamma > 0.0)) throw std::runtime_error("--gamma required without --gram");
    const GaussianKernelParams params{gamma, 2};
    if (circulant) {
      if (!is_full_circle_equiangular(sino.grid)) {
        throw std::runtime_error(
            "--circulant requires an equiangular full-circle sinogram grid");
      }
      gram = assemble_circulant(params, sino.n_angles(), sino.mesh);
    } else {
      gram = assemble_dense(params, sino.grid, sino.mesh);
    }
  }

  const CoefficientField coeffs =
      gram.layout == GramLayout::block_circulant
          ? solve_circulant(gram, sino, nu, cache ? &*cache : nullptr)
          : solve_tikhonov(gram, sino, nu, cache ? &*cache : nullptr);
  const ImageRaster img = evaluate_reconstruction(coeffs, size);
  const std::string cfg =
      hash_hex("kr|" + std::to_string(gram.params.gamma) + "|" +
               std::to_string(nu) + "|" + std::to_string(size) + "|" + sino_path);
  write_pgm(img, out, "config=" + cfg);
  if (!csv.empty()) write_raster_csv(img, csv);

  const ImageRaster truth = truth_csv.empty() ? rasterize(shepp_logan(), size)
                                              : read_raster_csv(truth_csv);
  std::printf("kernel reconstruction -> %s (config %s)\n", out.c_str(), cfg.c_str());
  std::printf("solver residual: %.3e\nRMSE vs %s: %.6f\n", coeffs.residual,
              truth_csv.empty() ? "default phantom" : truth_csv.c_str(),
              rmse(img, truth));
  report_timing(watch);
  return 0;
}

int cmd_reconstruct_fbp(const std::string& sino_path, int size, int pad,
                        const std::string& out, const std::string& csv,
                        const std::string& truth_csv) {
  Stopwatch watch;
  const Sinogram sino = read_sinogram_csv(sino_path);
  FbpConfig cfg;
  cfg.pad_factor = pad;
  const ImageRaster img = fbp_reconstruct(sino, size, cfg);
  const std::string hash = hash_hex("fbp|" + std::to_string(size) + "|" +
                                    std::to_string(pad) + "|" + sino_path);
  write_pgm(img, out, "config=" + hash);
  if (!csv.empty()) write_raster_csv(img, csv);
  const ImageRaster truth = truth_csv.empty() ? rasterize(shepp_logan(), size)
                                              : read_raster_csv(truth_csv);
  std::printf("FBP reconstruction -> %s (config %s)\nRMSE vs %s: %.6f\n",
              out.c_str(), hash.c_str(),
              truth_csv.empty() ? "default phantom" : truth_csv.c_str(),
              rmse(img, truth));
  report_timing(watch);
  return 0;
}

int cmd_benchmark(int mc, const std::string& sigmas_s, const std::string& lambdas_s,
                  const std::string& gammas_s, const std::string& nus_s, int n,
                  int m, int size, std::uint64_t seed, const std::string& out) {
  Stopwatch watch;
  const std::vector<double> sigmas = parse_real_list(sigmas_s);
  const std::vector<double> lambdas = parse_real_list(lambdas_s);
  const std::vector<double> gammas = parse_real_list(gammas_s);
  const std::vector<double> nus = parse_real_list(nus_s);
  const Phantom phantom = shepp_logan();
  const ImageRaster truth = rasterize(phantom, size);
  const DetectorMesh mesh = make_mesh(m);

  std::ofstream file(out);
  if (!file) throw std::runtime_error("cannot open " + out);
  file << "config,sigma,lambda,rep,method,gamma,nu,rmse\n";
  const std::string cfg = hash_hex(
      "benchmark|" + std::to_string(mc) + "|" + sigmas_s + "|" + lambdas_s + "|" +
      gammas_s + "|" + nus_s + "|" + std::to_string(n) + "|" + std::to_string(m) +
      "|" + std::to_string(seed));

  for (size_t si = 0; si < sigmas.size(); ++si) {
    const double sigma = sigmas[si];
    for (size_t li = 0; li < lambdas.size(); ++li) {
      const double lambda = lambdas[li];
      for (int rep = 0; rep < mc; ++rep) {
        const std::uint64_t rep_seed =
            derive_seed(seed, (si * 131 + li) * 1009 + static_cast<std::uint64_t>(rep));
        const AngleGrid grid =
            make_angle_grid(GridKind::lambda_mix, n, lambda, rep_seed);
        const Sinogram sino = simulate_sinogram(phantom, grid, mesh, sigma, rep_seed);

        const ImageRaster fbp_img = fbp_reconstruct(sino, size);
        char row[256];
        std::snprintf(row, sizeof(row), "%s,%g,%g,%d,fbp,,,%.8f\n", cfg.c_str(),
                      sigma, lambda, rep, rmse(fbp_img, truth));
        file << row;

        for (const double gamma : gammas) {
          const GramMatrix gram = assemble_dense({gamma, 2}, grid, mesh);
          double best_rmse = 1e300, best_nu = nus.empty() ? 0.0 : nus.front();
          for (const double nu : nus) {
            const CoefficientField coeffs = solve_tikhonov(gram, sino, nu);
            const double r = rmse(evaluate_reconstruction(coeffs, size), truth);
            if (r < best_rmse) {
              best_rmse = r;
              best_nu = nu;
            }
          }
          std::snprintf(row, sizeof(row), "%s,%g,%g,%d,kr,%g,%g,%.8f\n",
                        cfg.c_str(), sigma, lambda, rep, gamma, best_nu, best_rmse);
          file << row;
          file.flush();
        }
        std::printf("sigma=%g lambda=%g rep=%d done (%.1f s)\n", sigma, lambda,
                    rep, watch.seconds());
      }
    }
  }
  std::printf("benchmark -> %s (config %s)\n", out.c_str(), cfg.c_str());
  report_timing(watch);
  return 0;
}

int cmd_verify(bool quick, std::uint64_t seed) {
  VerifyOptions opts;
  opts.quick = quick;
  if (seed != 0) opts.seed = seed;
  const auto results = run_verification(opts);
  for (const auto& r : results) {
    std::printf("[%s] %s %s: %s (%.1f s)\n", r.pass ? "PASS" : "FAIL",
                r.id.c_str(), r.name.c_str(), r.detail.c_str(), r.seconds);
  }
  return all_passed(results) ? 0 : 3;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Kernel-based tomographic reconstruction toolkit"};
  app.require_subcommand(1);

  // phantom
  auto* phantom_cmd = app.add_subcommand("phantom", "rasterize the phantom");
  int ph_size = 200;
  std::string ph_out, ph_csv, ph_json, ph_table;
  phantom_cmd->add_option("--size", ph_size, "pixels per axis");
  phantom_cmd->add_option("--out", ph_out, "output PGM")->required();
  phantom_cmd->add_option("--csv", ph_csv, "lossless CSV raster");
  phantom_cmd->add_option("--phantom-json", ph_json, "custom ellipse table");
  phantom_cmd->add_option("--write-table", ph_table, "dump the ellipse table");

  // sinogram
  auto* sino_cmd = app.add_subcommand("sinogram", "simulate a sinogram");
  int sg_n = 40, sg_m = 100;
  std::string sg_grid = "random", sg_out, sg_json;
  double sg_lambda = 1.0, sg_sigma = 0.0;
  std::uint64_t sg_seed = 1;
  sino_cmd->add_option("--n", sg_n, "number of viewing angles");
  sino_cmd->add_option("--m", sg_m, "number of detector cells");
  sino_cmd->add_option("--grid", sg_grid, "equi|full|random|lambda");
  sino_cmd->add_option("--lambda", sg_lambda, "angle regularity in [0,1]");
  sino_cmd->add_option("--sigma", sg_sigma, "noise level");
  sino_cmd->add_option("--seed", sg_seed, "rng seed");
  sino_cmd->add_option("--out", sg_out, "output CSV")->required();
  sino_cmd->add_option("--phantom-json", sg_json, "custom ellipse table");

  // gram
  auto* gram_cmd = app.add_subcommand("gram", "precompute a Gram cache");
  std::string gr_gamma = "2^11", gr_layout = "dense", gr_sino, gr_grid = "random",
              gr_out, gr_nu;
  int gr_n = 40, gr_m = 100;
  double gr_lambda = 1.0;
  std::uint64_t gr_seed = 1;
  gram_cmd->add_option("--gamma", gr_gamma, "kernel sharpness (accepts 2^k)");
  gram_cmd->add_option("--layout", gr_layout, "dense|circulant");
  gram_cmd->add_option("--sino", gr_sino, "take grids from this sinogram CSV");
  gram_cmd->add_option("--n", gr_n, "angles (without --sino)");
  gram_cmd->add_option("--m", gr_m, "mesh size (without --sino)");
  gram_cmd->add_option("--grid", gr_grid, "equi|full|random|lambda");
  gram_cmd->add_option("--lambda", gr_lambda, "angle regularity");
  gram_cmd->add_option("--seed", gr_seed, "grid seed");
  gram_cmd->add_option("--factor-nu", gr_nu,
                       "also store the factorization for this penalty");
  gram_cmd->add_option("--out", gr_out, "output cache file")->required();

  // reconstruct kr | fbp
  auto* rec_cmd = app.add_subcommand("reconstruct", "reconstruct from a sinogram");
  rec_cmd->require_subcommand(1);
  auto* kr_cmd = rec_cmd->add_subcommand("kr", "kernel reconstruction");
  std::string kr_sino, kr_gamma, kr_nu = "2^-7", kr_gram, kr_out, kr_csv,
              kr_truth;
  int kr_size = 200;
  bool kr_circ = false;
  kr_cmd->add_option("--sino", kr_sino, "input sinogram CSV")->required();
  kr_cmd->add_option("--gamma", kr_gamma,
                     "kernel sharpness (accepts 2^k; taken from --gram when omitted)");
  kr_cmd->add_option("--nu", kr_nu, "penalty (accepts 2^-k)");
  kr_cmd->add_flag("--circulant", kr_circ, "use the block-circulant fast path");
  kr_cmd->add_option("--gram", kr_gram, "precomputed Gram cache");
  kr_cmd->add_option("--size", kr_size, "raster pixels per axis");
  kr_cmd->add_option("--out", kr_out, "output PGM")->required();
  kr_cmd->add_option("--csv", kr_csv, "lossless CSV raster");
  kr_cmd->add_option("--truth", kr_truth, "truth raster CSV for the RMSE line");

  auto* fbp_cmd = rec_cmd->add_subcommand("fbp", "filtered backprojection");
  std::string fb_sino, fb_out, fb_csv, fb_truth;
  int fb_size = 200, fb_pad = 2;
  fbp_cmd->add_option("--sino", fb_sino, "input sinogram CSV")->required();
  fbp_cmd->add_option("--size", fb_size, "raster pixels per axis");
  fbp_cmd->add_option("--pad", fb_pad, "FFT pad factor (power of two)");
  fbp_cmd->add_option("--out", fb_out, "output PGM")->required();
  fbp_cmd->add_option("--csv", fb_csv, "lossless CSV raster");
  fbp_cmd->add_option("--truth", fb_truth, "truth raster CSV for the RMSE line");

  // benchmark
  auto* bench_cmd = app.add_subcommand("benchmark", "RMSE sweep vs FBP");
  int bm_mc = 21, bm_n = 40, bm_m = 100, bm_size = 100;
  std::string bm_sigmas = "0,20,50,100", bm_lambdas = "0,0.333,0.667,1";
  std::string bm_gammas = "2^5..2^15", bm_nus = "2^-20..2^-5", bm_out;
  std::uint64_t bm_seed = 20250810;
  bench_cmd->add_option("--mc", bm_mc, "Monte-Carlo repetitions per cell");
  bench_cmd->add_option("--sigmas", bm_sigmas, "noise levels");
  bench_cmd->add_option("--lambdas", bm_lambdas, "angle regularity values");
  bench_cmd->add_option("--gammas", bm_gammas, "kernel grid (2^a..2^b)");
  bench_cmd->add_option("--nus", bm_nus, "penalty grid (2^a..2^b)");
  bench_cmd->add_option("--n", bm_n, "angles");
  bench_cmd->add_option("--m", bm_m, "mesh size");
  bench_cmd->add_option("--size", bm_size, "RMSE raster size");
  bench_cmd->add_option("--seed", bm_seed, "base seed");
  bench_cmd->add_option("--out", bm_out, "output CSV")->required();

  // verify
  auto* verify_cmd = app.add_subcommand("verify", "run the numerical check suite");
  bool vf_quick = false;
  std::uint64_t vf_seed = 0;
  verify_cmd->add_flag("--quick", vf_quick, "reduced repetitions, skip timings");
  verify_cmd->add_option("--seed", vf_seed, "override the check seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (phantom_cmd->parsed()) {
      return cmd_phantom(ph_size, ph_out, ph_csv, ph_json, ph_table);
    }
    if (sino_cmd->parsed()) {
      return cmd_sinogram(sg_n, sg_m, sg_grid, sg_lambda, sg_sigma, sg_seed,
                          sg_out, sg_json);
    }
    if (gram_cmd->parsed()) {
      return cmd_gram(parse_real(gr_gamma), gr_layout, gr_sino, gr_n, gr_m,
                      gr_grid, gr_lambda, gr_seed,
                      gr_nu.empty() ? 0.0 : parse_real(gr_nu), gr_out);
    }
    if (rec_cmd->parsed()) {
      if (kr_cmd->parsed()) {
        const double gamma = kr_gamma.empty() ? 0.0 : parse_real(kr_gamma);
        return cmd_reconstruct_kr(kr_sino, gamma, parse_real(kr_nu), kr_circ,
                                  kr_gram, kr_size, kr_out, kr_csv, kr_truth);
      }
      return cmd_reconstruct_fbp(fb_sino, fb_size, fb_pad, fb_out, fb_csv, fb_truth);
    }
    if (bench_cmd->parsed()) {
      return cmd_benchmark(bm_mc, bm_sigmas, bm_lambdas, bm_gammas, bm_nus, bm_n,
                           bm_m, bm_size, bm_seed, bm_out);
    }
    if (verify_cmd->parsed()) {
      return cmd_verify(vf_quick, vf_seed);
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  return 0;
}
