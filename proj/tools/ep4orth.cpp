// Command-line front end: instance generators, solvers, the stationarity
// checker and the table harnesses.

#include "cli_support.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <iostream>
#include <mutex>
#include <thread>

namespace {

using namespace ep4orth;
using cli::json;
namespace fs = std::filesystem;

enum Exit { kOk = 0, kValidation = 2, kSolver = 3 };

struct Options {
  Index n = 0;
  Index k = 0;
  Index r = 0;
  double xi = 0.0;
  double noise = 0.1;
  std::uint64_t seed = 0;
  int seeds = 20;
  std::string preset;
  std::string config;
  std::string in;
  std::string out;
  std::string format;
  std::string solution;
  std::string xstar;
  std::string truth;
  std::string labels;
  std::string objective = "linear";
  std::string c;
  double tol = 1e-8;
  std::optional<double> tol_feas;
  std::optional<double> sigma0;
  std::optional<int> tmax;
  bool history = false;
  int jobs = 0;
  std::vector<Index> n_list;
  std::vector<Index> k_list;
  std::vector<double> xi_list;
};

io::Format output_format(const Options& o, const fs::path& path) {
  return o.format.empty() ? io::format_from_path(path) : io::format_from_name(o.format);
}

io::Format input_format(const Options& o, const fs::path& path) {
  return o.format.empty() ? io::format_from_path(path) : io::format_from_name(o.format);
}

Matrix read_input(const Options& o, const std::string& path, const char* flag) {
  if (path.empty()) throw Error(ErrorCode::InvalidParameter, std::string(flag) + " is required");
  return io::read_matrix(path, input_format(o, path));
}

DriverConfig build_config(const Options& o, const std::string& default_preset, Index k, json& manifest) {
  const std::string name = o.preset.empty() ? default_preset : o.preset;
  DriverConfig cfg = cli::preset_config(name, k);
  json overrides = json::object();
  if (!o.config.empty()) {
    const json j = cli::read_json_file(o.config);
    cli::apply_config_json(j, cfg);
    overrides["config_file"] = j;
  }
  if (o.tol_feas) {
    cfg.tol_feas = *o.tol_feas;
    overrides["tol_feas"] = *o.tol_feas;
  }
  if (o.sigma0) {
    cfg.sigma0 = *o.sigma0;
    overrides["sigma0"] = *o.sigma0;
  }
  if (o.tmax) {
    cfg.t_max = *o.tmax;
    overrides["t_max"] = *o.tmax;
  }
  cfg.validate();
  manifest["preset"] = name;
  manifest["overrides"] = overrides;
  manifest["config"] = cli::config_to_json(cfg);
  return cfg;
}

void emit(const Options& o, const json& report) {
  const std::string text = report.dump(2) + "\n";
  if (o.out.empty()) {
    std::cout << text;
  } else {
    io::write_text_atomic(o.out, text);
  }
}

int finish(const SolveReport& rep) {
  return rep.termination == Termination::Stalled || rep.subsolver_failure ? kSolver : kOk;
}

json base_manifest(const std::string& command, const Options& o) {
  json m;
  m["command"] = command;
  if (!o.out.empty()) m["output"] = o.out;
  return m;
}

// ---------------------------------------------------------------------------

int cmd_gen_projection(const Options& o) {
  if (o.out.empty()) throw Error(ErrorCode::InvalidParameter, "--out is required");
  const ProjectionInstance inst = gen_projection(o.n, o.k, o.xi, o.seed);
  const fs::path out = o.out;
  const fs::path xs = cli::sibling_path(out, "xstar");
  io::write_matrix(out, inst.c, output_format(o, out));
  io::write_matrix(xs, inst.x_star, output_format(o, xs));
  json j{{"c", out.string()}, {"x_star", xs.string()}, {"n", o.n}, {"k", o.k}, {"xi", o.xi}, {"seed", o.seed}};
  std::cout << j.dump(2) << "\n";
  return kOk;
}

int cmd_gen_onmf(const Options& o) {
  if (o.out.empty()) throw Error(ErrorCode::InvalidParameter, "--out is required");
  const OnmfInstance inst = gen_onmf(o.n, o.r, o.k, o.xi, o.seed);
  const fs::path out = o.out;
  const fs::path bp = cli::sibling_path(out, "b");
  io::write_matrix(out, inst.a, output_format(o, out));
  io::write_matrix(bp, inst.b, output_format(o, bp));
  json j{{"a", out.string()}, {"b", bp.string()}, {"n", o.n}, {"r", o.r}, {"k", o.k}, {"xi", o.xi}, {"seed", o.seed}};
  std::cout << j.dump(2) << "\n";
  return kOk;
}

int cmd_project(const Options& o) {
  json manifest = base_manifest("project", o);
  const Matrix c = read_input(o, o.in, "--in");
  std::optional<Matrix> x_star;
  fs::path xs = o.xstar;
  if (xs.empty() && fs::exists(cli::sibling_path(o.in, "xstar"))) xs = cli::sibling_path(o.in, "xstar");
  if (!xs.empty()) {
    x_star = io::read_matrix(xs, input_format(o, xs));
    require_same_shape(*x_star, c, "--xstar");
  }
  manifest["instance"] = json{{"in", o.in}, {"x_star", xs.empty() ? json(nullptr) : json(xs.string())}};
  if (c.cols() < 1 || c.rows() < c.cols()) throw Error(ErrorCode::BadShape, "--in: need n >= k >= 1");
  const DriverConfig cfg = build_config(o, "projection", c.cols(), manifest);

  const PenaltyContext ctx(c.rows(), c.cols());
  LinearObjective f = projection_objective(c);
  const Matrix x0 = round_to_feasible(project_oblique_plus_raw(c)).x;
  const SolveReport rep = ep4orth_solve(f, ctx, cfg, x0, c);

  json report = cli::solve_report_json(rep, o.history);
  report["distance"] = (rep.x - c).norm();
  if (x_star) report["gap"] = gap(rep.x, *x_star, c);
  report["manifest"] = manifest;
  if (!o.solution.empty()) io::write_matrix(o.solution, rep.x, output_format(o, o.solution));
  emit(o, report);
  return finish(rep);
}

int cmd_onmf(const Options& o, bool exact) {
  const std::string command = exact ? "opnmf" : "onmf";
  json manifest = base_manifest(command, o);
  const Matrix raw = read_input(o, o.in, "--in");
  if (raw.minCoeff() < 0.0) throw Error(ErrorCode::NegativeEntry, "--in: A must be nonnegative");
  std::vector<Index> kept_rows, kept_cols;
  const Matrix a = remove_degenerate(raw, &kept_rows, &kept_cols);
  if (o.k < 1 || o.k > a.rows() || o.k > a.cols()) throw Error(ErrorCode::InvalidParameter, "--k must lie in [1, min(n, r)]");

  std::optional<Matrix> b;
  fs::path bp = o.truth;
  if (bp.empty() && fs::exists(cli::sibling_path(o.in, "b"))) bp = cli::sibling_path(o.in, "b");
  if (!bp.empty()) {
    const Matrix full = io::read_matrix(bp, input_format(o, bp));
    if (full.rows() != raw.rows()) throw Error(ErrorCode::DimensionMismatch, "--truth: row count differs from A");
    Matrix kept(Index(kept_rows.size()), full.cols());
    for (std::size_t i = 0; i < kept_rows.size(); ++i) kept.row(Index(i)) = full.row(kept_rows[i]);
    b = std::move(kept);
  }
  std::optional<std::vector<int>> truth_labels;
  int truth_classes = 0;
  if (!o.labels.empty()) {
    std::vector<int> all = cli::read_labels(o.labels, &truth_classes);
    if (Index(all.size()) != raw.rows()) throw Error(ErrorCode::DimensionMismatch, "--labels: count differs from rows of A");
    std::vector<int> kept;
    for (Index i : kept_rows) kept.push_back(all[std::size_t(i)]);
    truth_labels = std::move(kept);
  } else if (b) {
    truth_labels = row_argmax_labels(*b);
    truth_classes = int(b->cols());
  }
  manifest["instance"] = json{{"in", o.in},
                              {"k", o.k},
                              {"rows_removed", raw.rows() - a.rows()},
                              {"cols_removed", raw.cols() - a.cols()},
                              {"truth", bp.empty() ? json(nullptr) : json(bp.string())},
                              {"labels", o.labels.empty() ? json(nullptr) : json(o.labels)}};
  const DriverConfig cfg = build_config(o, "onmf", o.k, manifest);

  const OnmfResult res = onmf_solve(a, o.k, cfg, exact ? OnmfModel::Exact : OnmfModel::GaussNewton);
  json report = cli::solve_report_json(res.report, o.history);
  report["resi"] = res.resi;
  if (b) report["resi_truth"] = (a - *b * (b->transpose() * a)).norm();
  if (truth_labels) {
    const int classes = std::max<int>(int(o.k), truth_classes);
    report["metrics"] = cli::metrics_json(clustering_metrics(res.labels, *truth_labels, classes));
  }
  report["manifest"] = manifest;
  if (!o.solution.empty()) io::write_matrix(o.solution, res.report.x, output_format(o, o.solution));
  emit(o, report);
  return finish(res.report);
}

int cmd_kindicators(const Options& o) {
  json manifest = base_manifest("kindicators", o);
  Matrix u;
  std::optional<std::vector<int>> truth;
  int truth_classes = 0;
  if (!o.in.empty()) {
    u = read_input(o, o.in, "--in");
    manifest["instance"] = json{{"in", o.in}};
    if (!o.labels.empty()) {
      truth = cli::read_labels(o.labels, &truth_classes);
      if (Index(truth->size()) != u.rows()) throw Error(ErrorCode::DimensionMismatch, "--labels: count differs from rows of U");
    }
  } else {
    std::vector<int> lab;
    u = gen_kindicators_features(o.n, o.k, o.noise, o.seed, &lab);
    truth = std::move(lab);
    truth_classes = int(o.k);
    manifest["instance"] = json{{"generator", "noisy-indicator"}, {"n", o.n}, {"k", o.k}, {"noise", o.noise}, {"seed", o.seed}};
  }
  const Index k = u.cols();
  if (k < 1 || u.rows() < k) throw Error(ErrorCode::BadShape, "U: need n >= k >= 1");
  if ((u.transpose() * u - Matrix::Identity(k, k)).norm() > 1e-10) {
    throw Error(ErrorCode::InvalidParameter, "U must have orthonormal columns");
  }
  const DriverConfig cfg = build_config(o, "kindicators", k, manifest);
  const KIndicatorsResult res = kindicators_solve(u, cfg);
  json report = cli::solve_report_json(res.report, o.history);
  report["y_orthogonality"] = (res.y.transpose() * res.y - Matrix::Identity(k, k)).norm();
  if (truth) {
    report["metrics"] = cli::metrics_json(clustering_metrics(res.labels, *truth, std::max<int>(int(k), truth_classes)));
  }
  report["manifest"] = manifest;
  if (!o.solution.empty()) io::write_matrix(o.solution, res.report.x, output_format(o, o.solution));
  emit(o, report);
  return finish(res.report);
}

int cmd_check_kkt(const Options& o) {
  const Matrix x = read_input(o, o.in, "--in");
  const Matrix c = read_input(o, o.c, "--c");
  std::unique_ptr<Objective> f;
  if (o.objective == "linear") {
    require_same_shape(x, c, "--c");
    f = std::make_unique<LinearObjective>(c);
  } else if (o.objective == "projection") {
    require_same_shape(x, c, "--c");
    f = std::make_unique<LinearObjective>(projection_objective(c));
  } else if (o.objective == "quadratic") {
    if (c.rows() != x.rows() || c.cols() != x.rows()) throw Error(ErrorCode::BadShape, "--c: M must be n x n");
    f = std::make_unique<QuadraticFormObjective>(QuadraticFormObjective::from_matrix(c));
  } else {
    throw Error(ErrorCode::InvalidParameter, "--objective: expected linear, projection or quadratic");
  }
  const StationarityReport st = check_stationarity_original(x, *f, o.tol);
  json report{{"classification", to_string(st.kind)},
              {"support_violation", st.support_violation},
              {"sign_violation", st.sign_violation},
              {"max_violation", st.max_violation},
              {"feasi", feasibility_violation(x)},
              {"objective", f->value(x)},
              {"manifest", json{{"command", "check-kkt"}, {"in", o.in}, {"c", o.c}, {"objective", o.objective}, {"tol", o.tol}}}};
  emit(o, report);
  return kOk;
}

// ---------------------------------------------------------------------------
// Harnesses

template <class Fn>
void run_parallel(int count, int jobs, Fn&& fn) {
  const int workers = std::max(1, std::min(count, jobs > 0 ? jobs : int(std::max(1u, std::thread::hardware_concurrency()))));
  std::atomic<int> next{0};
  std::mutex err_mu;
  std::exception_ptr err;
  auto work = [&] {
    for (int i = next++; i < count; i = next++) {
      try {
        fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(err_mu);
        if (!err) err = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  for (int w = 1; w < workers; ++w) pool.emplace_back(work);
  work();
  for (auto& t : pool) t.join();
  if (err) std::rethrow_exception(err);
}

int cmd_bench_proj(const Options& o) {
  const std::vector<Index> ns = o.n_list.empty() ? std::vector<Index>{200, 500} : o.n_list;
  const std::vector<Index> ks = o.k_list.empty() ? std::vector<Index>{5, 10} : o.k_list;
  const std::vector<double> xis = o.xi_list.empty() ? std::vector<double>{0.5, 0.7, 0.9, 0.95, 0.98, 1.0} : o.xi_list;
  json manifest = base_manifest("bench table-proj", o);
  manifest["n"] = ns;
  manifest["k"] = ks;
  manifest["xi"] = xis;
  manifest["seeds"] = o.seeds;
  manifest["seed"] = o.seed;
  const DriverConfig cfg = build_config(o, "projection", ks.front(), manifest);

  struct Run {
    double gap = 0.0, feasi = 0.0, seconds = 0.0;
    int nproj = 0;
    bool stalled = false;
  };
  struct Cell {
    Index n, k;
    double xi;
  };
  std::vector<Cell> cells;
  for (Index k : ks)
    for (Index n : ns)
      for (double xi : xis) cells.push_back({n, k, xi});
  const int total = int(cells.size()) * o.seeds;
  std::vector<Run> runs(static_cast<std::size_t>(total));
  run_parallel(total, o.jobs, [&](int idx) {
    const Cell& cell = cells[std::size_t(idx / o.seeds)];
    const std::uint64_t seed = o.seed + std::uint64_t(idx % o.seeds);
    const ProjectionInstance inst = gen_projection(cell.n, cell.k, cell.xi, seed);
    const PenaltyContext ctx(cell.n, cell.k);
    LinearObjective f = projection_objective(inst.c);
    const Matrix x0 = round_to_feasible(project_oblique_plus_raw(inst.c)).x;
    const SolveReport rep = ep4orth_solve(f, ctx, cfg, x0, inst.c);
    Run& r = runs[std::size_t(idx)];
    r.gap = gap(rep.x, inst.x_star, inst.c);
    r.feasi = rep.feasi;
    r.seconds = rep.seconds;
    r.nproj = rep.inner_iterations;
    r.stalled = rep.termination == Termination::Stalled || rep.subsolver_failure;
  });

  json rows = json::array();
  std::printf("%6s %4s %5s | %4s %9s %9s %8s %8s %9s\n", "n", "k", "xi", "suc", "gap", "gap_max", "time", "nproj", "feasi_max");
  bool failed = false;
  for (std::size_t ci = 0; ci < cells.size(); ++ci) {
    int suc = 0;
    double gsum = 0.0, gmax = 0.0, tsum = 0.0, psum = 0.0, fmax = 0.0;
    for (int s = 0; s < o.seeds; ++s) {
      const Run& r = runs[ci * std::size_t(o.seeds) + std::size_t(s)];
      suc += r.gap <= 1e-10 ? 1 : 0;
      gsum += std::max(r.gap, 0.0);
      gmax = std::max(gmax, r.gap);
      tsum += r.seconds;
      psum += r.nproj;
      fmax = std::max(fmax, r.feasi);
      failed = failed || r.stalled;
    }
    const double m = double(o.seeds);
    const Cell& c = cells[ci];
    std::printf("%6ld %4ld %5.2f | %4d %9.1e %9.1e %8.3f %8.1f %9.1e\n", long(c.n), long(c.k), c.xi, suc, gsum / m, gmax,
                tsum / m, psum / m, fmax);
    rows.push_back(json{{"n", c.n}, {"k", c.k}, {"xi", c.xi}, {"suc", suc}, {"runs", o.seeds}, {"gap_mean", gsum / m},
                        {"gap_max", gmax}, {"seconds_mean", tsum / m}, {"nproj_mean", psum / m}, {"feasi_max", fmax}});
  }
  if (!o.out.empty()) io::write_text_atomic(o.out, json{{"rows", rows}, {"manifest", manifest}}.dump(2) + "\n");
  return failed ? kSolver : kOk;
}

int cmd_bench_onmf(const Options& o) {
  const Index n = o.n_list.empty() ? 200 : o.n_list.front();
  const Index k = o.k_list.empty() ? 5 : o.k_list.front();
  const Index r = o.r > 0 ? o.r : 3 * n;
  const std::vector<double> xis = o.xi_list.empty() ? std::vector<double>{0.0, 0.01, 0.1, 1.0, 10.0, 100.0} : o.xi_list;
  json manifest = base_manifest("bench table-onmf", o);
  manifest["n"] = n;
  manifest["r"] = r;
  manifest["k"] = k;
  manifest["xi"] = xis;
  manifest["seeds"] = o.seeds;
  manifest["seed"] = o.seed;
  const DriverConfig cfg = build_config(o, "onmf", k, manifest);

  struct Run {
    double feasi = 0.0, resi = 0.0, lower = 0.0, seconds = 0.0, nmi = 0.0;
    bool stalled = false;
  };
  const int total = int(xis.size()) * o.seeds;
  std::vector<Run> runs(static_cast<std::size_t>(total));
  run_parallel(total, o.jobs, [&](int idx) {
    const double xi = xis[std::size_t(idx / o.seeds)];
    const OnmfInstance inst = gen_onmf(n, r, k, xi, o.seed + std::uint64_t(idx % o.seeds));
    const OnmfResult res = onmf_solve(inst.a, k, cfg);
    Run& out = runs[std::size_t(idx)];
    out.feasi = res.report.feasi;
    out.resi = res.resi;
    out.lower = (inst.a - inst.b * (inst.b.transpose() * inst.a)).norm();
    out.seconds = res.report.seconds;
    out.nmi = clustering_metrics(res.labels, inst.labels, int(k)).nmi;
    out.stalled = res.report.termination == Termination::Stalled || res.report.subsolver_failure;
  });

  json rows = json::array();
  std::printf("%8s | %9s %9s %9s %8s %6s\n", "xi", "feasi", "resi", "resi_B", "time", "nmi");
  bool failed = false;
  for (std::size_t xi_i = 0; xi_i < xis.size(); ++xi_i) {
    double f = 0.0, re = 0.0, lo = 0.0, t = 0.0, nm = 0.0;
    for (int s = 0; s < o.seeds; ++s) {
      const Run& run = runs[xi_i * std::size_t(o.seeds) + std::size_t(s)];
      f += run.feasi;
      re += run.resi;
      lo += run.lower;
      t += run.seconds;
      nm += run.nmi;
      failed = failed || run.stalled;
    }
    const double m = double(o.seeds);
    std::printf("%8.2f | %9.1e %9.1e %9.1e %8.3f %6.3f\n", xis[xi_i], f / m, re / m, lo / m, t / m, nm / m);
    rows.push_back(json{{"xi", xis[xi_i]}, {"runs", o.seeds}, {"feasi_mean", f / m}, {"resi_mean", re / m},
                        {"resi_truth_mean", lo / m}, {"seconds_mean", t / m}, {"nmi_mean", nm / m}});
  }
  if (!o.out.empty()) io::write_text_atomic(o.out, json{{"rows", rows}, {"manifest", manifest}}.dump(2) + "\n");
  return failed ? kSolver : kOk;
}

// ---------------------------------------------------------------------------

void add_solver_flags(CLI::App* sub, Options& o) {
  sub->add_option("--preset", o.preset, "projection | onmf | kindicators | default");
  sub->add_option("--config", o.config, "JSON file of DriverConfig overrides")->check(CLI::ExistingFile);
  sub->add_option("--tol-feas", o.tol_feas, "break when ||XV||^2 - 1 <= value");
  sub->add_option("--sigma0", o.sigma0, "initial penalty parameter");
  sub->add_option("--tmax", o.tmax, "maximum outer iterations");
  sub->add_option("--format", o.format, "matrix format override: mm or csv");
  sub->add_option("--out", o.out, "report path (stdout when omitted)");
  sub->add_option("--solution", o.solution, "write the final X here");
  sub->add_flag("--history", o.history, "include per-outer-iteration records in the report");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Exact penalty solver for optimization over nonnegative orthogonal matrices"};
  app.require_subcommand(1);
  Options o;

  auto* gp = app.add_subcommand("gen-projection", "projection instance with known solution; writes C and X*");
  gp->add_option("--n", o.n, "rows")->required();
  gp->add_option("--k", o.k, "columns")->required();
  gp->add_option("--xi", o.xi, "noise level in [0, 1]")->required();
  gp->add_option("--seed", o.seed, "instance seed");
  gp->add_option("--out", o.out, "path for C; X* goes to the .xstar sibling")->required();
  gp->add_option("--format", o.format, "mm or csv");

  auto* go = app.add_subcommand("gen-onmf", "synthetic ONMF instance; writes A and B");
  go->add_option("--n", o.n, "rows")->required();
  go->add_option("--r", o.r, "columns of A")->required();
  go->add_option("--k", o.k, "clusters")->required();
  go->add_option("--xi", o.xi, "noise level");
  go->add_option("--seed", o.seed, "instance seed");
  go->add_option("--out", o.out, "path for A; B goes to the .b sibling")->required();
  go->add_option("--format", o.format, "mm or csv");

  auto* pr = app.add_subcommand("project", "projection of C onto the nonnegative Stiefel set");
  pr->add_option("--in", o.in, "C")->required()->check(CLI::ExistingFile);
  pr->add_option("--xstar", o.xstar, "known projection, for the gap")->check(CLI::ExistingFile);
  add_solver_flags(pr, o);

  auto* on = app.add_subcommand("onmf", "ONMF with the partial Gauss-Newton model");
  auto* op = app.add_subcommand("opnmf", "ONMF with the exact quartic model");
  for (auto* sub : {on, op}) {
    sub->add_option("--in", o.in, "nonnegative data matrix A")->required()->check(CLI::ExistingFile);
    sub->add_option("--k", o.k, "number of clusters")->required();
    sub->add_option("--truth", o.truth, "generating B, for resi_truth and labels")->check(CLI::ExistingFile);
    sub->add_option("--labels", o.labels, "ground-truth labels, one integer per line")->check(CLI::ExistingFile);
    add_solver_flags(sub, o);
  }

  auto* ki = app.add_subcommand("kindicators", "K-indicators clustering of orthonormal features");
  ki->add_option("--in", o.in, "features U with orthonormal columns")->check(CLI::ExistingFile);
  ki->add_option("--labels", o.labels, "ground-truth labels, one integer per line")->check(CLI::ExistingFile);
  ki->add_option("--n", o.n, "synthetic rows (without --in)");
  ki->add_option("--k", o.k, "synthetic clusters (without --in)");
  ki->add_option("--noise", o.noise, "synthetic noise level");
  ki->add_option("--seed", o.seed, "synthetic seed");
  add_solver_flags(ki, o);

  auto* ck = app.add_subcommand("check-kkt", "classify a feasible point as stationary, weakly stationary or neither");
  ck->add_option("--in", o.in, "feasible X")->required()->check(CLI::ExistingFile);
  ck->add_option("--objective", o.objective, "linear <C,X> | projection ||X-C||^2 | quadratic -tr(X^T C X)");
  ck->add_option("--c", o.c, "coefficient matrix C")->required()->check(CLI::ExistingFile);
  ck->add_option("--tol", o.tol, "violation tolerance");
  ck->add_option("--format", o.format, "mm or csv");
  ck->add_option("--out", o.out, "report path (stdout when omitted)");

  auto* bench = app.add_subcommand("bench", "table harnesses");
  bench->require_subcommand(1);
  auto* tp = bench->add_subcommand("table-proj", "projection success table");
  auto* to = bench->add_subcommand("table-onmf", "synthetic ONMF table");
  for (auto* sub : {tp, to}) {
    sub->add_option("--n", o.n_list, "row counts (comma separated)")->delimiter(',');
    sub->add_option("--k", o.k_list, "column counts (comma separated)")->delimiter(',');
    sub->add_option("--xi", o.xi_list, "noise levels (comma separated)")->delimiter(',');
    sub->add_option("--seeds", o.seeds, "runs per cell")->check(CLI::PositiveNumber);
    sub->add_option("--seed", o.seed, "first seed");
    sub->add_option("--jobs", o.jobs, "worker threads (default: hardware concurrency)");
    add_solver_flags(sub, o);
  }
  to->add_option("--r", o.r, "columns of A (default 3n)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kValidation;
  }

  try {
    if (gp->parsed()) return cmd_gen_projection(o);
    if (go->parsed()) return cmd_gen_onmf(o);
    if (pr->parsed()) return cmd_project(o);
    if (on->parsed()) return cmd_onmf(o, false);
    if (op->parsed()) return cmd_onmf(o, true);
    if (ki->parsed()) return cmd_kindicators(o);
    if (ck->parsed()) return cmd_check_kkt(o);
    if (tp->parsed()) return cmd_bench_proj(o);
    if (to->parsed()) return cmd_bench_onmf(o);
  } catch (const Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    switch (e.code()) {
      case ErrorCode::NonFiniteObjective:
      case ErrorCode::SingularCurvature:
      case ErrorCode::SingularGram:
        return kSolver;
      default:
        return kValidation;
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kSolver;
  }
  return kValidation;
}
