// qrx: error probabilities and receiver optimisation for binary coherent-state
// constellations over a Gaussian phase-noise channel.
//
// Exit codes: 0 success, 2 usage error, 3 I/O error, 4 numerical failure.

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "qrx/qrx.hpp"
#include "qrx/report.hpp"

namespace {

constexpr int exit_usage = 2;
constexpr int exit_io = 3;
constexpr int exit_numerical = 4;

struct IoError : std::runtime_error
{
  using std::runtime_error::runtime_error;
};

struct Common
{
  double nbar = 2.0;
  double sigma = 0.0;
  int pnr = 8;
  std::string output;
  unsigned jobs = 1;
  std::uint64_t seed = 1;
  std::uint64_t trials = 0;
  double efficiency = 1.0;
  double tolerance = 1e-10;

  qrx::QuadratureOptions quadrature() const
  {
    qrx::QuadratureOptions q;
    q.tolerance = tolerance;
    return q;
  }
  double effective_nbar() const { return efficiency * nbar; }
  double amplitude_scale() const { return std::sqrt(efficiency); }
};

// shortest text that round-trips
std::string str(double v)
{
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

void kv(const std::string& key, const std::string& value) { std::cout << key << " = " << value << '\n'; }
void kv(const std::string& key, double value) { kv(key, qrx::format_sci(value)); }

/// Output stream for CSV: the named file, or stdout when no path was given.
class CsvSink
{
 public:
  explicit CsvSink(const std::string& path)
  {
    if (path.empty() || path == "-") return;
    file_ = std::make_unique<std::ofstream>(path);
    if (!*file_) throw IoError("cannot open output file: " + path);
    path_ = path;
  }
  std::ostream& stream() { return file_ ? *file_ : std::cout; }
  void close()
  {
    if (!file_) return;
    file_->flush();
    if (!*file_) throw IoError("failed writing output file: " + path_);
    file_->close();
  }

 private:
  std::unique_ptr<std::ofstream> file_;
  std::string path_;
};

std::vector<double> grid_points(double lo, double hi, double step)
{
  if (!(step > 0.0)) throw qrx::ArgumentError("step must be positive");
  if (hi < lo) throw qrx::ArgumentError("range maximum is below its minimum");
  std::vector<double> pts;
  const auto n = static_cast<long>(std::floor((hi - lo) / step + 1e-9));
  for (long i = 0; i <= n; ++i) pts.push_back(lo + i * step);
  return pts;
}

void add_common(CLI::App* cmd, Common& c, bool with_nbar, bool with_sigma)
{
  if (with_nbar) cmd->add_option("--nbar", c.nbar, "mean photon number per symbol")->capture_default_str();
  if (with_sigma) cmd->add_option("--sigma", c.sigma, "phase noise strength (rad)")->capture_default_str();
  cmd->add_option("--efficiency", c.efficiency, "detector efficiency; amplitudes scaled by sqrt(eta)")
      ->check(CLI::Range(0.0, 1.0))
      ->capture_default_str();
  cmd->add_option("--tolerance", c.tolerance, "relative tolerance of phase averages")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
}

// --- sql ------------------------------------------------------------------

int run_sql(const Common& c)
{
  const qrx::PhaseNoise noise(c.sigma);
  const double n = c.effective_nbar();
  const double dd = qrx::perr_ook_dd(n);
  const double hom = qrx::perr_bpsk_hom(n, noise, c.quadrature());
  kv("nbar", str(c.nbar));
  kv("sigma", str(c.sigma));
  kv("efficiency", str(c.efficiency));
  kv("perr_ook_dd", dd);
  kv("perr_bpsk_hom", hom);
  kv("sql", std::min(dd, hom));
  kv("sql_branch", hom < dd ? "BPSK/hom" : "OOK/DD");
  return 0;
}

// --- sweep-nbar -----------------------------------------------------------

struct SweepNbarArgs
{
  double min = 0.0;
  double max = 10.0;
  double step = 0.1;
  double wavelength = qrx::constants::telecom_wavelength;
};

int run_sweep_nbar(const Common& c, const SweepNbarArgs& a)
{
  const auto points = grid_points(a.min, a.max, a.step);
  const qrx::PhaseNoise noiseless;
  CsvSink sink(c.output);
  auto& os = sink.stream();
  qrx::RunManifest m{"sweep-nbar",
                     {{"nbar-min", str(a.min)},
                      {"nbar-max", str(a.max)},
                      {"step", str(a.step)},
                      {"wavelength", str(a.wavelength)},
                      {"efficiency", str(c.efficiency)},
                      {"tolerance", str(c.tolerance)},
                      {"psd_convention", "nbar*h*c/lambda (one symbol per unit time-bandwidth)"}},
                     qrx::tool_version,
                     qrx::RunManifest::utc_now()};
  m.write(os);
  qrx::write_csv_row(os, {"nbar", "psd_w_per_hz", "perr_ook_dd", "perr_bpsk_hom", "perr_kennedy",
                          "perr_helstrom"});
  for (double nbar : points) {
    const double n = c.efficiency * nbar;
    qrx::write_csv_row(os, {qrx::format_sci(nbar), qrx::format_sci(qrx::psd_watts_per_hz(nbar, a.wavelength)),
                            qrx::format_sci(qrx::perr_ook_dd(n)),
                            qrx::format_sci(qrx::perr_bpsk_hom(n, noiseless, c.quadrature())),
                            qrx::format_sci(qrx::perr_bpsk_kennedy(n, noiseless, c.quadrature())),
                            qrx::format_sci(qrx::perr_helstrom_noiseless(qrx::make_bpsk(n)))});
  }
  sink.close();
  return 0;
}

// --- optimisation helpers -------------------------------------------------

struct OptimizerArgs
{
  int grid = 181;
  int beta_grid = 241;
  double refine_tolerance = 1e-8;
};

void add_optimizer_flags(CLI::App* cmd, OptimizerArgs& o)
{
  cmd->add_option("--grid", o.grid, "theta grid points on [0, pi)")->check(CLI::Range(2, 100000))->capture_default_str();
  cmd->add_option("--beta-grid", o.beta_grid, "displacement grid points")->check(CLI::Range(2, 100000))->capture_default_str();
  cmd->add_option("--refine-tolerance", o.refine_tolerance, "parameter tolerance of the refinement")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
}

qrx::OptimizationProblem make_problem(const Common& c, const OptimizerArgs& o, double sigma, int pnr)
{
  qrx::OptimizationProblem p;
  p.nbar = c.effective_nbar();
  p.noise = qrx::PhaseNoise(sigma);
  p.pnr_ceiling = pnr;
  p.grid_resolution = o.grid;
  p.beta_resolution = o.beta_grid;
  p.refine_tolerance = o.refine_tolerance;
  p.jobs = c.jobs;
  p.quadrature = c.quadrature();
  return p;
}

// --- sweep-sigma ----------------------------------------------------------

struct SweepSigmaArgs
{
  double min = 0.0;
  double max = 0.6;
  double step = 0.05;
  std::vector<int> pnr{1, 2, 3, 8};
  bool helstrom_opt = true;
};

int run_sweep_sigma(const Common& c, const SweepSigmaArgs& a, const OptimizerArgs& o)
{
  const auto sigmas = grid_points(a.min, a.max, a.step);
  std::vector<int> pnrs = a.pnr;
  std::sort(pnrs.begin(), pnrs.end());
  pnrs.erase(std::unique(pnrs.begin(), pnrs.end()), pnrs.end());
  for (int p : pnrs)
    if (p < 1) throw qrx::ArgumentError("PNR ceilings must be at least 1");

  // open the output before the (long) computation so path errors surface early
  CsvSink sink(c.output);
  auto rows = qrx::sweep_sigma(make_problem(c, o, 0.0, pnrs.back()), sigmas, pnrs);

  std::vector<std::optional<double>> helstrom_opt(sigmas.size());
  if (a.helstrom_opt) {
    qrx::detail::parallel_for(sigmas.size(), c.jobs, [&](std::size_t i) {
      try {
        helstrom_opt[i] = qrx::optimize_helstrom(c.effective_nbar(), qrx::PhaseNoise(sigmas[i])).perr;
      } catch (const std::exception& e) {
        std::cerr << "warning: Helstrom optimisation failed at sigma = " << sigmas[i] << ": " << e.what() << '\n';
      }
    });
  }

  auto& os = sink.stream();
  std::string pnr_list;
  for (int p : pnrs) pnr_list += (pnr_list.empty() ? "" : ",") + std::to_string(p);
  qrx::RunManifest m{"sweep-sigma",
                     {{"nbar", str(c.nbar)},
                      {"sigma-min", str(a.min)},
                      {"sigma-max", str(a.max)},
                      {"step", str(a.step)},
                      {"pnr", pnr_list},
                      {"grid", std::to_string(o.grid)},
                      {"beta-grid", std::to_string(o.beta_grid)},
                      {"refine-tolerance", str(o.refine_tolerance)},
                      {"efficiency", str(c.efficiency)},
                      {"tolerance", str(c.tolerance)},
                      {"perr_helstrom", "Helstrom bound at the optimised constellation of the largest PNR"},
                      {"perr_helstrom_opt", "Helstrom bound minimised over real constellations"}},
                     qrx::tool_version,
                     qrx::RunManifest::utc_now()};
  m.write(os);
  std::vector<std::string> header{"sigma", "perr_sql", "perr_helstrom", "perr_helstrom_opt"};
  for (int p : pnrs) header.push_back("perr_pnr" + std::to_string(p));
  for (const char* h : {"alpha0", "alpha1", "beta", "K", "orientation"}) header.push_back(h);
  qrx::write_csv_row(os, header);

  const std::size_t ns = sigmas.size();
  for (std::size_t i = 0; i < ns; ++i) {
    const qrx::PhaseNoise noise(sigmas[i]);
    std::vector<std::string> f{qrx::format_sci(sigmas[i]),
                               qrx::format_sci(qrx::perr_sql_baseline(c.effective_nbar(), noise, c.quadrature()))};
    const auto& top = rows[(pnrs.size() - 1) * ns + i];
    f.push_back(top.result ? qrx::format_sci(top.result->perr_helstrom) : "");
    f.push_back(qrx::format_sci(helstrom_opt[i]));
    for (std::size_t k = 0; k < pnrs.size(); ++k) {
      const auto& row = rows[k * ns + i];
      if (!row.result)
        std::cerr << "warning: optimisation failed at sigma = " << row.sigma << ", pnr = " << row.pnr_ceiling
                  << ": " << row.error << '\n';
      f.push_back(row.result ? qrx::format_sci(row.result->perr) : "");
    }
    if (top.result) {
      const auto& r = *top.result;
      f.push_back(qrx::format_sci(r.constellation.alpha0.real()));
      f.push_back(qrx::format_sci(r.constellation.alpha1.real()));
      f.push_back(qrx::format_sci(r.config.beta.real()));
      f.push_back(std::to_string(r.config.threshold_k));
      f.push_back(qrx::to_string(r.orientation));
    } else {
      f.insert(f.end(), 5, "");
    }
    qrx::write_csv_row(os, f);
  }
  sink.close();
  return 0;
}

// --- optimize -------------------------------------------------------------

int run_optimize(const Common& c, const OptimizerArgs& o, std::uint64_t validate, const std::string& trace_path)
{
  const auto p = make_problem(c, o, c.sigma, c.pnr);
  CsvSink trace(trace_path.empty() ? std::string{} : trace_path);
  const auto r = qrx::optimize(p);
  kv("nbar", str(c.nbar));
  kv("sigma", str(c.sigma));
  kv("pnr", std::to_string(c.pnr));
  kv("efficiency", str(c.efficiency));
  kv("alpha0", r.constellation.alpha0.real());
  kv("alpha1", r.constellation.alpha1.real());
  kv("beta", r.config.beta.real());
  kv("K", std::to_string(r.config.threshold_k));
  kv("orientation", qrx::to_string(r.orientation));
  kv("perr", r.perr);
  kv("perr_sql", r.perr_sql);
  kv("perr_helstrom", r.perr_helstrom);
  kv("below_sql", r.perr < r.perr_sql ? "yes" : "no");
  kv("sandwich", r.perr_helstrom <= r.perr && r.perr <= 0.5 ? "ok" : "violated");

  std::uint64_t trials = validate ? validate : c.trials;
  if (trials > 0) {
    qrx::TrialConfig t;
    t.trials = trials;
    t.seed = c.seed;
    t.jobs = c.jobs;
    const auto mc = qrx::simulate_perr(r.constellation, r.config, p.noise, t, r.orientation);
    kv("mc_trials", std::to_string(trials));
    kv("mc_seed", std::to_string(c.seed));
    kv("mc_estimate", mc.estimate);
    kv("mc_std_error", mc.std_error);
    kv("mc_z_score", mc.z_score(r.perr));
  }

  if (!trace_path.empty()) {
    auto& os = trace.stream();
    qrx::RunManifest m{"optimize",
                       {{"nbar", str(c.nbar)}, {"sigma", str(c.sigma)}, {"pnr", std::to_string(c.pnr)}},
                       qrx::tool_version,
                       qrx::RunManifest::utc_now()};
    m.write(os);
    qrx::write_csv_row(os, {"iteration", "perr"});
    for (const auto& t : r.trace) qrx::write_csv_row(os, {std::to_string(t.iteration), qrx::format_sci(t.perr)});
    trace.close();
  }
  return 0;
}

// --- pk -------------------------------------------------------------------

struct PkArgs
{
  double alpha_re = 2.0, alpha_im = 0.0;
  double beta_re = 0.0, beta_im = 0.0;
  int kmax = -1;
};

int run_pk(const Common& c, const PkArgs& a)
{
  const double s = c.amplitude_scale();
  const qrx::ComplexAmplitude alpha(s * a.alpha_re, s * a.alpha_im);
  const qrx::ComplexAmplitude beta(s * a.beta_re, s * a.beta_im);
  const int n = a.kmax >= 0 ? a.kmax : qrx::default_truncation(alpha, beta);
  const auto d = qrx::photocount_distribution(alpha, beta, qrx::PhaseNoise(c.sigma), n, c.quadrature());
  CsvSink sink(c.output);
  auto& os = sink.stream();
  qrx::RunManifest m{"pk",
                     {{"alpha", str(a.alpha_re) + (a.alpha_im < 0 ? "" : "+") + str(a.alpha_im) + "i"},
                      {"beta", str(a.beta_re) + (a.beta_im < 0 ? "" : "+") + str(a.beta_im) + "i"},
                      {"sigma", str(c.sigma)},
                      {"truncation", std::to_string(n)},
                      {"efficiency", str(c.efficiency)},
                      {"tail_mass", qrx::format_sci(d.tail_mass)}},
                     qrx::tool_version,
                     qrx::RunManifest::utc_now()};
  m.write(os);
  qrx::write_csv_row(os, {"k", "p_k"});
  for (int k = 0; k <= n; ++k) qrx::write_csv_row(os, {std::to_string(k), qrx::format_sci(d.probs[k])});
  sink.close();
  return 0;
}

// --- helstrom -------------------------------------------------------------

struct HelstromArgs
{
  std::optional<double> alpha0, alpha1;
  bool optimize = false;
};

int run_helstrom(const Common& c, const HelstromArgs& a)
{
  const qrx::PhaseNoise noise(c.sigma);
  kv("sigma", str(c.sigma));
  if (a.alpha0 || a.alpha1) {
    const double s = c.amplitude_scale();
    const qrx::BinaryConstellation con{s * a.alpha0.value_or(0.0), s * a.alpha1.value_or(0.0)};
    kv("alpha0", con.alpha0.real());
    kv("alpha1", con.alpha1.real());
    kv("nbar", con.mean_photon_number());
    kv("perr_helstrom", qrx::perr_helstrom(con, noise));
    kv("perr_helstrom_noiseless", qrx::perr_helstrom_noiseless(con));
    return 0;
  }
  const double n = c.effective_nbar();
  kv("nbar", str(c.nbar));
  kv("perr_helstrom_bpsk", qrx::perr_helstrom(qrx::make_bpsk(n), noise));
  kv("perr_helstrom_ook", qrx::perr_helstrom(qrx::make_ook(n), noise));
  kv("perr_helstrom_noiseless_bpsk", qrx::perr_helstrom_noiseless(qrx::make_bpsk(n)));
  if (a.optimize && n > 0.0) {
    const auto best = qrx::optimize_helstrom(n, noise);
    kv("perr_helstrom_opt", best.perr);
    kv("alpha0_opt", best.constellation.alpha0.real());
    kv("alpha1_opt", best.constellation.alpha1.real());
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv)
{
  CLI::App app{"Error probabilities of binary coherent-state receivers under Gaussian phase noise"};
  app.set_version_flag("--version", std::string(qrx::tool_version));
  app.require_subcommand(1);

  Common common;

  auto* sql = app.add_subcommand("sql", "conventional-detection SQL at one point");
  add_common(sql, common, true, true);

  SweepNbarArgs nbar_args;
  auto* sweep_nbar = app.add_subcommand("sweep-nbar", "noiseless error curves versus mean photon number (CSV)");
  add_common(sweep_nbar, common, false, false);
  sweep_nbar->add_option("--nbar-min", nbar_args.min)->check(CLI::NonNegativeNumber)->capture_default_str();
  sweep_nbar->add_option("--nbar-max", nbar_args.max)->check(CLI::NonNegativeNumber)->capture_default_str();
  sweep_nbar->add_option("--step", nbar_args.step)->check(CLI::PositiveNumber)->capture_default_str();
  sweep_nbar->add_option("--wavelength", nbar_args.wavelength, "metres, for the PSD column")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  sweep_nbar->add_option("--output,-o", common.output, "CSV path (stdout when omitted)");

  SweepSigmaArgs sigma_args;
  OptimizerArgs opt_args;
  auto* sweep_sigma = app.add_subcommand("sweep-sigma", "optimised receivers versus phase noise (CSV)");
  add_common(sweep_sigma, common, true, false);
  sweep_sigma->add_option("--sigma-min", sigma_args.min)->check(CLI::NonNegativeNumber)->capture_default_str();
  sweep_sigma->add_option("--sigma-max", sigma_args.max)->check(CLI::NonNegativeNumber)->capture_default_str();
  sweep_sigma->add_option("--step", sigma_args.step)->check(CLI::PositiveNumber)->capture_default_str();
  sweep_sigma->add_option("--pnr", sigma_args.pnr, "comma-separated PNR ceilings")->delimiter(',')->capture_default_str();
  sweep_sigma->add_flag("!--no-helstrom-opt", sigma_args.helstrom_opt, "skip the independently optimised Helstrom column");
  sweep_sigma->add_option("--jobs,-j", common.jobs)->check(CLI::Range(1u, 1024u))->capture_default_str();
  sweep_sigma->add_option("--output,-o", common.output, "CSV path (stdout when omitted)");
  add_optimizer_flags(sweep_sigma, opt_args);

  std::uint64_t validate = 0;
  std::string trace_path;
  auto* optimize = app.add_subcommand("optimize", "optimise constellation, displacement and threshold");
  add_common(optimize, common, true, true);
  optimize->add_option("--pnr", common.pnr, "PNR ceiling")->check(CLI::Range(1, 1000))->capture_default_str();
  optimize->add_option("--validate", validate, "Monte Carlo trials for an independent check");
  optimize->add_option("--trials", common.trials, "alias for --validate");
  optimize->add_option("--seed", common.seed)->capture_default_str();
  optimize->add_option("--jobs,-j", common.jobs)->check(CLI::Range(1u, 1024u))->capture_default_str();
  optimize->add_option("--output,-o", trace_path, "CSV path for the optimisation trace");
  add_optimizer_flags(optimize, opt_args);

  PkArgs pk_args;
  auto* pk = app.add_subcommand("pk", "photocount distribution after displacement (CSV)");
  add_common(pk, common, false, true);
  pk->add_option("--alpha", pk_args.alpha_re, "signal amplitude, real part")->capture_default_str();
  pk->add_option("--alpha-im", pk_args.alpha_im)->capture_default_str();
  pk->add_option("--beta", pk_args.beta_re, "displacement, real part")->capture_default_str();
  pk->add_option("--beta-im", pk_args.beta_im)->capture_default_str();
  pk->add_option("--kmax", pk_args.kmax, "largest count listed (default: tail below 1e-12)");
  pk->add_option("--output,-o", common.output, "CSV path (stdout when omitted)");

  HelstromArgs hel_args;
  auto* helstrom = app.add_subcommand("helstrom", "Helstrom bound for phase-diffused coherent states");
  add_common(helstrom, common, true, true);
  helstrom->add_option("--alpha0", hel_args.alpha0, "explicit symbol amplitude (real)");
  helstrom->add_option("--alpha1", hel_args.alpha1, "explicit symbol amplitude (real)");
  helstrom->add_flag("--optimize", hel_args.optimize, "also minimise over real constellations at --nbar");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : exit_usage;
  }

  try {
    if (common.nbar < 0.0 || !std::isfinite(common.nbar)) throw qrx::ArgumentError("--nbar must be non-negative");
    if (*sql) return run_sql(common);
    if (*sweep_nbar) return run_sweep_nbar(common, nbar_args);
    if (*sweep_sigma) return run_sweep_sigma(common, sigma_args, opt_args);
    if (*optimize) return run_optimize(common, opt_args, validate, trace_path);
    if (*pk) return run_pk(common, pk_args);
    if (*helstrom) return run_helstrom(common, hel_args);
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_io;
  } catch (const qrx::NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return exit_numerical;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_usage;
  }
  return exit_usage;
}
