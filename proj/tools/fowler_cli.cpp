// Command line driver for the periodic Fowler solver.
//
// Subcommands: run, converge, stability-scan, project-test, symbol-dump.
// Outputs are staged in a temporary directory and moved into place only
// when the whole command succeeds, so failures leave no partial files.
//
// Exit codes: 0 success, 2 configuration error, 3 stability gate refusal,
// 4 solver failure.

#include <CLI11.hpp>
#include <filesystem>
#include <fstream>

#include "fowler/config.hpp"
#include "fowler/experiments.hpp"
#include "fowler/svg.hpp"

namespace fs = std::filesystem;
using namespace fowler;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitGate = 3;
constexpr int kExitSolver = 4;

struct Staging {
  fs::path final_dir;
  fs::path tmp_dir;
  std::vector<fs::path> files;

  explicit Staging(const std::string& out) : final_dir(out), tmp_dir(out + ".staging") {
    std::error_code ec;
    fs::create_directories(final_dir, ec);
    if (ec || !fs::is_directory(final_dir)) throw std::runtime_error("cannot create output dir " + out);
    // probe writability before any compute
    const fs::path probe = final_dir / ".write-probe";
    std::ofstream p(probe);
    if (!p) throw std::runtime_error("output dir not writable: " + out);
    p.close();
    fs::remove(probe, ec);
    fs::remove_all(tmp_dir, ec);
    fs::create_directories(tmp_dir);
  }

  void write(const std::string& name, const std::string& content) {
    const fs::path p = tmp_dir / name;
    std::ofstream f(p, std::ios::binary);
    if (!f) throw std::runtime_error("cannot write " + p.string());
    f << content;
    if (!f.good()) throw std::runtime_error("short write on " + p.string());
    files.push_back(p);
  }

  void commit() {
    for (const fs::path& p : files) fs::rename(p, final_dir / p.filename());
    std::error_code ec;
    fs::remove_all(tmp_dir, ec);
  }

  ~Staging() {
    std::error_code ec;
    fs::remove_all(tmp_dir, ec);
  }
};

ExperimentConfig experiment_from(const Config& c) {
  ExperimentConfig e;
  e.datum = c.get_int("datum", e.datum);
  e.r = c.get_int("r", e.r);
  e.L = c.get_double("L", e.L);
  e.eps = c.get_double("eps", e.eps);
  e.t_end = c.get_double("t_end", e.t_end);
  e.ladder = c.get_int_list("ladder", e.ladder);
  e.reference_elements = c.get_int("reference_elements", e.reference_elements);
  e.dt = c.get_double("dt", e.dt);
  e.domain_radius = c.get_double("domain_radius", e.domain_radius);
  const std::string rule = c.get_string("step_rule", "fixed");
  if (rule == "fixed")
    e.step_rule = StepRule::fixed;
  else if (rule == "coupled")
    e.step_rule = StepRule::coupled;
  else
    throw std::runtime_error("config: step_rule must be 'fixed' or 'coupled'");
  e.kernel = default_kernel(e.L);
  e.kernel.enabled = c.get_bool("kernel_enabled", true);
  e.kernel.truncation = c.get_double("kernel_truncation", e.kernel.truncation);
  e.kernel.split_r = c.get_double("kernel_split_r", e.kernel.split_r);
  return e;
}

std::string state_csv(const StateVector& u) {
  std::string out = "x, u\n";
  char buf[96];
  const FemSpace& sp = *u.space;
  for (int j = 0; j < sp.dof_count; ++j) {
    const double x = sp.lagrange_point(j);
    std::snprintf(buf, sizeof(buf), "%.12e, %.12e\n", x, u.coefficients[j]);
    out += buf;
  }
  return out;
}

int cmd_run(const Config& c, const std::string& out, bool plot, bool dry_run, bool override_gate, int threads) {
  (void)threads;
  c.restrict_keys({"datum", "r", "L", "eps", "t_end", "ladder", "reference_elements", "dt", "domain_radius",
                   "step_rule", "kernel_enabled", "kernel_truncation", "kernel_split_r", "elements",
                   "snapshot_every"});
  ExperimentConfig e = experiment_from(c);
  e.validate();
  const int elements = c.get_int("elements", 640);

  auto sp = make_space(build_uniform_mesh(e.L, elements), e.r);
  OperatorSet ops = build_operator_set(sp, e.kernel, e.eps);
  SolverConfig sc;
  sc.dt = e.dt > 0.0 ? e.dt : e.t_end / elements;
  sc.t_end = e.t_end;
  sc.stability_override = override_gate;
  sc.snapshot_every = c.get_int("snapshot_every", 0);

  StabilityEstimate st = check_stability(estimate_inverse_constants(ops), sc.dt);
  std::printf("stability: C1=%.6g C2=%.6g lhs=%.6g %s\n", st.C1, st.C2, st.lhs, st.pass ? "pass" : "FAIL");
  if (dry_run) return 0;
  if (!st.pass && !override_gate) {
    std::fprintf(stderr, "stability gate refused the run (use --override-stability)\n");
    return kExitGate;
  }

  Staging stage(out);
  StateVector u0 = interpolate(sp, initial_datum(e.datum));
  RunResult res = run_simulation(ops, u0, sc, exterior_dofs(*sp, e.domain_radius));
  char meta[512];
  std::snprintf(meta, sizeof(meta),
                "datum = %d\nr = %d\nelements = %d\neps = %.12g\nt_end = %.12g\ndt = %.12g\nsteps = %d\n"
                "picard_total = %d\nnorm_ratio = %.12g\nmean_drift = %.3e\nlhs = %.12g\n",
                e.datum, e.r, elements, e.eps, e.t_end, sc.dt, res.steps, res.picard_total, res.norm_ratio,
                res.mean_drift, st.lhs);
  stage.write("run.meta", meta);
  stage.write("initial.csv", state_csv(u0));
  stage.write("final.csv", state_csv(res.final_state));
  if (sc.snapshot_every > 0) {
    for (size_t i = 0; i < res.snapshots.size(); ++i) {
      char name[64];
      std::snprintf(name, sizeof(name), "snapshot_%03zu.csv", i);
      stage.write(name, state_csv(res.snapshots[i]));
    }
  }
  if (plot) {
    SvgChart chart("initial (solid) and final (dotted) state", "x", "u");
    PlotSeries a, b;
    for (double x = -e.L; x <= e.L + 1e-12; x += 2.0 * e.L / 512) {
      a.x.push_back(x);
      a.y.push_back(evaluate(u0, x));
      b.x.push_back(x);
      b.y.push_back(evaluate(res.final_state, x));
    }
    a.label = "t = 0";
    b.label = "t = T";
    b.dotted = true;
    b.stroke = "#aa2222";
    chart.add(a);
    chart.add(b);
    stage.write("run.svg", chart.render());
  }
  stage.commit();
  return 0;
}

int cmd_converge(const Config& c, const std::string& out, bool plot, int threads) {
  c.restrict_keys({"datum", "r", "L", "eps", "t_end", "ladder", "reference_elements", "dt", "domain_radius",
                   "step_rule", "kernel_enabled", "kernel_truncation", "kernel_split_r"});
  ExperimentConfig e = experiment_from(c);
  e.threads = threads;
  e.validate();
  Staging stage(out);
  ConvergenceStudy st = run_convergence_study(e);
  stage.write("report.csv", convergence_csv(st));
  if (plot) {
    SvgChart chart("ladder error against element count (log2 axes)", "log2 N", "log2 E_h");
    PlotSeries s;
    for (const ConvergenceRow& row : st.rows) {
      s.x.push_back(std::log2(double(row.elements)));
      s.y.push_back(std::log2(row.E_h));
    }
    chart.add(s);
    stage.write("report.svg", chart.render());
  }
  stage.commit();
  for (const ConvergenceRow& row : st.rows)
    std::printf("N=%5d  E_h=%.6e  alpha=%.4f\n", row.elements, row.E_h, row.alpha_h);
  return 0;
}

int cmd_scan(const Config& c, const std::string& out, int threads, bool override_gate) {
  c.restrict_keys({"datum", "r", "L", "eps", "t_end", "ladder", "reference_elements", "dt", "domain_radius",
                   "step_rule", "kernel_enabled", "kernel_truncation", "kernel_split_r", "scan_elements",
                   "scan_dts"});
  ExperimentConfig e = experiment_from(c);
  e.threads = threads;
  e.validate();
  std::vector<int> sizes = c.get_int_list("scan_elements", {20, 40, 80, 160});
  std::vector<double> dts = c.get_double_list("scan_dts", {2e-3, 1e-3, 5e-4, 2.5e-4});
  Staging stage(out);
  auto pts = run_stability_scan(e, sizes, dts, override_gate);
  stage.write("scan.csv", scan_csv(pts, e.L));
  stage.commit();
  for (const ScanPoint& p : pts)
    std::printf("N=%5d dt=%.4e lhs=%10.4g %s ratio=%.5g\n", p.elements, p.dt, p.lhs,
                p.gate_pass ? "pass" : (p.overridden ? "over" : "skip"), p.norm_ratio);
  return 0;
}

int cmd_project_test(const Config& c, const std::string& out) {
  c.restrict_keys({"r", "L", "ladder", "kernel_enabled", "kernel_truncation", "kernel_split_r", "lambda_margin"});
  const double L = c.get_double("L", 1.0);
  const int r = c.get_int("r", 2);
  std::vector<int> ladder = c.get_int_list("ladder", {16, 32, 64, 128, 256});
  KernelConfig k = default_kernel(L);
  k.enabled = c.get_bool("kernel_enabled", true);
  k.truncation = c.get_double("kernel_truncation", k.truncation);
  k.split_r = c.get_double("kernel_split_r", k.split_r);
  const double margin = c.get_double("lambda_margin", 2.0);
  if (r < 2) throw std::runtime_error("config: r must be >= 2");

  auto v = [](double x) { return std::sin(M_PI * x); };
  auto dv = [](double x) { return M_PI * std::cos(M_PI * x); };
  ProjectionOrderStudy st = projection_order_study(L, r, ladder, k, v, dv, margin);

  std::string csv = "element_count, err_l2, err_h1\n";
  char buf[128];
  for (const ProjectionOrderRow& row : st.rows) {
    std::snprintf(buf, sizeof(buf), "%d, %.12e, %.12e\n", row.elements, row.err_l2, row.err_h1);
    csv += buf;
  }
  std::snprintf(buf, sizeof(buf), "# slope_l2 = %.6f  slope_h1 = %.6f\n", st.slope_l2, st.slope_h1);
  csv += buf;
  Staging stage(out);
  stage.write("projection.csv", csv);
  stage.commit();
  std::printf("slope_l2=%.4f (expect %d)  slope_h1=%.4f (expect %d)\n", st.slope_l2, r, st.slope_h1, r - 1);
  return 0;
}

int cmd_symbol_dump(const Config& c, const std::string& out) {
  c.restrict_keys({"L", "eps", "n_max", "kernel_enabled", "kernel_truncation", "kernel_split_r"});
  const double L = c.get_double("L", 1.0);
  const double eps = c.get_double("eps", 0.15);
  const int n_max = c.get_int("n_max", 128);
  KernelConfig k = default_kernel(L);
  k.enabled = c.get_bool("kernel_enabled", true);
  k.truncation = c.get_double("kernel_truncation", k.truncation);
  k.split_r = c.get_double("kernel_split_r", k.split_r);
  if (n_max < 1) throw std::runtime_error("config: n_max must be positive");

  const double w0 = growth_constant_w0(L, n_max, k, eps);
  std::string csv;
  char buf[200];
  std::snprintf(buf, sizeof(buf), "# L=%.6g eps=%.6g n_max=%d w0=%.12e\n", L, eps, n_max, w0);
  csv += buf;
  csv += "n, re_sJ, im_sJ, re_sI, im_sI, dissipation\n";
  for (int n = 0; n <= n_max; ++n) {
    const complexd sJ = fourier_symbol(n, L, k);
    const complexd sI = complexd(0.0, M_PI * n / L) * sJ;
    std::snprintf(buf, sizeof(buf), "%d, %.12e, %.12e, %.12e, %.12e, %.12e\n", n, sJ.real(), sJ.imag(),
                  sI.real(), sI.imag(), mode_dissipation(n, L, k, eps));
    csv += buf;
  }
  Staging stage(out);
  stage.write("symbols.csv", csv);
  stage.commit();
  std::printf("w0 = %.8e over modes 1..%d\n", w0, n_max);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Galerkin solver for the periodic Fowler equation"};
  app.require_subcommand(1);

  std::string config_path, out_dir = "out";
  bool plot = false, dry_run = false, override_gate = false;
  int threads = 1;
  app.add_option("--config", config_path, "path to a key = value config file");
  app.add_option("--out", out_dir, "output directory");
  app.add_flag("--plot", plot, "also emit SVG plots");
  app.add_flag("--dry-run", dry_run, "validate and print the stability estimate only");
  app.add_flag("--override-stability", override_gate, "run even when the step size gate fails");
  app.add_option("--threads", threads, "worker threads for scans and ladders")->check(CLI::PositiveNumber);

  auto* run = app.add_subcommand("run", "single simulation, snapshots and final state");
  auto* converge = app.add_subcommand("converge", "refinement ladder against a fine reference");
  auto* scan = app.add_subcommand("stability-scan", "grid scan of the step size gate");
  auto* project = app.add_subcommand("project-test", "elliptic projection order study");
  auto* symbols = app.add_subcommand("symbol-dump", "Fourier symbol table and growth constant");
  for (auto* sub : {run, converge, scan, project, symbols}) sub->fallthrough();

  CLI11_PARSE(app, argc, argv);

  try {
    Config cfg = config_path.empty() ? Config::parse_string("") : Config::parse_file(config_path);
    if (run->parsed()) return cmd_run(cfg, out_dir, plot, dry_run, override_gate, threads);
    if (converge->parsed()) return cmd_converge(cfg, out_dir, plot, threads);
    if (scan->parsed()) return cmd_scan(cfg, out_dir, threads, override_gate);
    if (project->parsed()) return cmd_project_test(cfg, out_dir);
    if (symbols->parsed()) return cmd_symbol_dump(cfg, out_dir);
  } catch (const StabilityError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitGate;
  } catch (const PicardError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitSolver;
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitConfig;
  } catch (const std::runtime_error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitConfig;
  }
  return kExitConfig;
}
