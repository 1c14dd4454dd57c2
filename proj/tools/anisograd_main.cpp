// command line front end: bench / wstar / stats / profile / bounds
#include <algorithm>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <memory>
#include <numeric>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "anisograd/analysis.hpp"
#include "anisograd/harness.hpp"
#include "anisograd/synth.hpp"
#include "json.hpp"

using namespace anisograd;

namespace {

std::string dataset_hash_for(const std::string& spec) {
  return is_synth_spec(spec) ? fnv1a_hex(spec) : hash_file(spec);
}

std::string wstar_json(const WStarEstimate& ws, const std::string& dataset,
                       const std::string& dataset_hash) {
  nlohmann::json j;
  j["dataset"] = dataset;
  j["dataset_hash"] = dataset_hash;
  j["w_star"] = ws.w_star;
  j["f_star"] = ws.f_star;
  j["method"] = ws.method;
  j["iterations"] = ws.iterations;
  j["grad_norminf"] = ws.grad_norminf;
  j["plateau_reached"] = ws.plateau_reached;
  return j.dump(2) + "\n";
}

WStarEstimate load_wstar(const std::string& path, const std::string& dataset_hash) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open w* file " + path);
  nlohmann::json j = nlohmann::json::parse(in);
  WStarEstimate ws;
  ws.w_star = j.at("w_star").get<Vec>();
  ws.f_star = j.at("f_star").get<double>();
  ws.method = j.value("method", "file");
  ws.iterations = j.value("iterations", (int64_t)0);
  ws.grad_norminf = j.value("grad_norminf", 0.0);
  ws.plateau_reached = j.value("plateau_reached", false);
  if (j.contains("dataset_hash") && j["dataset_hash"].get<std::string>() != dataset_hash)
    std::cerr << "warning: w* file was computed for a different dataset\n";
  return ws;
}

struct BenchArgs {
  ExperimentConfig cfg;
  std::vector<std::string> algo_names{"adagrad", "sgd"};
  int dim = 0;
  int option = 2;
  std::string sampling = "epoch";
  std::string wstar_file;
  std::string wstar_method = "adagrad";
  int64_t wstar_iters = 30000;
  double wstar_step = 0.0;
  double wstar_tol = 1e-9;
};

void add_dataset_flags(CLI::App* cmd, std::string& dataset, int& dim) {
  cmd->add_option("--dataset", dataset, "libsvm file path or synth:... spec")->required();
  cmd->add_option("--dim", dim, "override feature dimension");
}

void finalize_cfg(BenchArgs& a) {
  if (a.dim > 0) a.cfg.dim_override = a.dim;
  a.cfg.algos.clear();
  for (const auto& s : a.algo_names) a.cfg.algos.push_back(parse_algo(s));
  a.cfg.option = a.option == 1 ? ProjOption::I : ProjOption::II;
  a.cfg.sampling = a.sampling == "epoch" ? Sampling::epoch : Sampling::replacement;
}

int run_bench(BenchArgs& a, bool emit_tables) {
  finalize_cfg(a);
  std::string dhash = dataset_hash_for(a.cfg.dataset);
  Dataset ds = make_dataset(a.cfg.dataset, a.cfg.dim_override.value_or(0), false);
  std::cout << "dataset " << ds.name << ": n=" << ds.n() << " dim=" << ds.dim
            << " avg_nnz=" << fmt_g(ds.avg_nnz()) << "\n";
  DataStats stats = compute_stats(ds);
  LogisticObjective obj(ds);
  SmoothnessVectors sv = smoothness_vectors(obj, stats);

  WStarEstimate ws;
  if (!a.wstar_file.empty()) {
    ws = load_wstar(a.wstar_file, dhash);
  } else {
    WStarOptions wo;
    wo.method = a.wstar_method;
    wo.iterations = a.wstar_iters;
    wo.step = a.wstar_step;
    wo.grad_tol = a.wstar_tol;
    wo.threads = resolve_workers(a.cfg.workers);
    ws = estimate_wstar(obj, wo, sv.l_specbound);
  }
  std::cout << "w*: f=" << fmt_g(ws.f_star) << " |grad|_inf=" << fmt_g(ws.grad_norminf)
            << " method=" << ws.method << " iters=" << ws.iterations
            << (ws.plateau_reached ? "" : " (plateau not reached)") << "\n";

  ExperimentResult res = run_grid(a.cfg, obj, ws.f_star);

  const std::string& dir = a.cfg.out_dir;
  write_text(dir + "/wstar.json", wstar_json(ws, a.cfg.dataset, dhash));
  write_text(dir + "/runs.csv", runs_csv(res, ds.name));
  write_text(dir + "/cells.csv", cells_csv(res, ds.name));
  write_text(dir + "/table2.csv", table2_csv(res, ds.name));
  write_text(dir + "/curves.csv", curves_csv(res, ds.name));
  write_text(dir + "/result.json", result_json(a.cfg, res, dhash));
  if (emit_tables) {
    std::vector<const RunTrace*> tps;
    for (const RunTrace& tr : res.traces) tps.push_back(&tr);
    Table1Report t1 = table1_report(ds.name, tps, ws.w_star, stats, sv);
    write_text(dir + "/table1.csv", table1_csv(t1));
    std::cout << "table1: D_inf=" << fmt_g(t1.d_inf) << " D_2=" << fmt_g(t1.d_2)
              << " C_var=" << fmt_g(t1.c_var) << "\n";
  }
  for (const CellAggregate& c : res.best) {
    std::cout << algo_name(c.algo) << " M=" << c.batch << ": gap=" << fmt_g(c.mean_gap) << "+-"
              << fmt_g(c.std_gap) << " (lr=" << fmt_g(c.lr) << " " << c.schedule
              << (c.any_diverged ? ", diverged" : "") << ")\n";
  }
  std::cout << "wrote " << dir << "/{runs,cells,table2,curves"
            << (emit_tables ? ",table1" : "") << "}.csv\n";
  return 0;
}

std::string stats_csv(const Dataset& ds, const DataStats& st, const SmoothnessVectors& sv) {
  std::ostringstream os;
  os << "dataset,n,dim,avg_nnz,L1_diag,Linf_diag,L_specbound,lambda_max,M_1,M_2,"
        "tail_tau,tail_residual\n";
  os << ds.name << ',' << st.n << ',' << st.dim << ',' << fmt_g(st.avg_nnz) << ','
     << fmt_g(sv.l_norm1) << ',' << fmt_g(sv.l_norminf) << ',' << fmt_g(sv.l_specbound) << ','
     << fmt_g(st.lambda_max) << ',' << fmt_g(st.m_p.at(1.0)) << ',' << fmt_g(st.m_p.at(2.0))
     << ',' << (st.tail_tau ? fmt_g(*st.tail_tau) : "") << ',' << fmt_g(st.tail_residual)
     << '\n';
  return os.str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"anisotropic stochastic optimization benchmark"};
  app.require_subcommand(1);

  BenchArgs bench;
  auto* cmd_bench = app.add_subcommand("bench", "grid search and batch sweep on one dataset");
  add_dataset_flags(cmd_bench, bench.cfg.dataset, bench.dim);
  cmd_bench->add_option("--algo", bench.algo_names, "algorithms to run (repeatable)");
  cmd_bench->add_option("--lr-grid", bench.cfg.lr_grid, "base learning rates");
  cmd_bench->add_option("--schedules", bench.cfg.schedules,
                        "schedules: constant, inverse_sqrt, cosine");
  cmd_bench->add_option("--batch", bench.cfg.batch_sizes, "batch sizes (repeatable)");
  cmd_bench->add_option("--epochs", bench.cfg.epochs, "epochs per run");
  cmd_bench->add_option("--steps", bench.cfg.steps_override, "fixed step count, overrides epochs");
  cmd_bench->add_option("--seeds", bench.cfg.seeds, "seed list");
  cmd_bench->add_option("--epsilon", bench.cfg.epsilon, "accumulator init")->capture_default_str();
  cmd_bench->add_option("--option", bench.option, "1 = projected, 2 = unconstrained")->capture_default_str()
      ->check(CLI::Range(1, 2));
  cmd_bench->add_option("--box-halfwidth", bench.cfg.box_halfwidth, "Option I box halfwidth");
  cmd_bench->add_option("--out", bench.cfg.out_dir, "output directory")->capture_default_str();
  cmd_bench->add_option("--workers", bench.cfg.workers, "worker threads (0 = auto)");
  cmd_bench->add_option("--sampling", bench.sampling, "replacement or epoch")->capture_default_str()
      ->check(CLI::IsMember({"replacement", "epoch"}));
  cmd_bench->add_option("--record-every", bench.cfg.record_every, "steps between records");
  cmd_bench->add_option("--w0-halfwidth", bench.cfg.w0_halfwidth, "w0 ~ U(-h,h)^d")->capture_default_str();
  cmd_bench->add_option("--w0-seed", bench.cfg.w0_seed, "seed for w0 draws");
  cmd_bench->add_option("--divergence-loss", bench.cfg.divergence_loss,
                        "flag a run as diverged past this loss");
  cmd_bench->add_option("--wstar-file", bench.wstar_file, "reuse a saved w* JSON");
  cmd_bench->add_option("--wstar-method", bench.wstar_method, "gd or adagrad")->capture_default_str();
  cmd_bench->add_option("--wstar-iters", bench.wstar_iters, "w* iteration budget")->capture_default_str();
  cmd_bench->add_option("--wstar-step", bench.wstar_step, "w* initial step (0 = auto)");
  cmd_bench->add_option("--wstar-tol", bench.wstar_tol, "w* gradient tolerance")->capture_default_str();

  struct {
    std::string dataset, method = "gd", out = "wstar.json";
    int dim = 0;
    int64_t iters = 100000;
    double step = 0.0, tol = 1e-9, epsilon = 1e-10;
    int threads = 0;
  } ws;
  auto* cmd_wstar = app.add_subcommand("wstar", "long full-batch run for the reference optimum");
  add_dataset_flags(cmd_wstar, ws.dataset, ws.dim);
  cmd_wstar->add_option("--method", ws.method, "gd or adagrad")->capture_default_str()
      ->check(CLI::IsMember({"gd", "adagrad"}));
  cmd_wstar->add_option("--iters", ws.iters, "iteration budget")->capture_default_str();
  cmd_wstar->add_option("--step", ws.step, "initial step (0 = auto)");
  cmd_wstar->add_option("--tol", ws.tol, "gradient inf-norm tolerance")->capture_default_str();
  cmd_wstar->add_option("--epsilon", ws.epsilon, "adagrad accumulator init")->capture_default_str();
  cmd_wstar->add_option("--workers", ws.threads, "threads for the full-batch pass");
  cmd_wstar->add_option("--out", ws.out, "output JSON path")->capture_default_str();

  struct {
    std::string dataset, fn, out = "out";
    int dim = 0, steps = 200, coords = 10;
    double lr = 0.1;
  } prof;
  auto* cmd_profile = app.add_subcommand("profile", "generalized-smoothness scatter and fits");
  cmd_profile->add_option("--dataset", prof.dataset, "libsvm file path or synth:... spec");
  cmd_profile->add_option("--dim", prof.dim, "override feature dimension");
  cmd_profile->add_option("--fn", prof.fn, "scalar test function instead of a dataset")
      ->check(CLI::IsMember({"quadratic", "exp", "quartic"}));
  cmd_profile->add_option("--steps", prof.steps, "trajectory length")->capture_default_str();
  cmd_profile->add_option("--lr", prof.lr, "adagrad step for the trajectory run")->capture_default_str();
  cmd_profile->add_option("--coords", prof.coords, "number of profiled coordinates")->capture_default_str();
  cmd_profile->add_option("--out", prof.out, "output directory")->capture_default_str();

  struct {
    std::string in, out;
    std::vector<std::string> which{"adagrad_convex", "sgd_convex"};
  } bnd;
  auto* cmd_bounds = app.add_subcommand("bounds", "evaluate convergence bound formulas");
  cmd_bounds->add_option("--in", bnd.in, "JSON file with the bound inputs")->required();
  cmd_bounds
      ->add_option("--which", bnd.which,
                   "adagrad_convex, sgd_convex, adagrad_nonconvex, "
                   "adagrad_nonconvex_generalized, sgd_nonconvex, adagradnorm_nonconvex")
      ->check(CLI::IsMember({"adagrad_convex", "sgd_convex", "adagrad_nonconvex",
                             "adagrad_nonconvex_generalized", "sgd_nonconvex",
                             "adagradnorm_nonconvex"}));
  cmd_bounds->add_option("--out", bnd.out, "also write the reports as JSON");

  struct {
    std::string dataset;
    int dim = 0;
    std::string out;
    bool full = false;
  } st;
  auto* cmd_stats = app.add_subcommand("stats", "dataset statistics and curvature candidates");
  add_dataset_flags(cmd_stats, st.dataset, st.dim);
  cmd_stats->add_option("--out", st.out, "write stats CSV here");
  cmd_stats->add_flag("--full", st.full,
                      "also run the full grid to estimate trajectory diameters");

  CLI11_PARSE(app, argc, argv);

  try {
    if (cmd_bench->parsed()) return run_bench(bench, true);

    if (cmd_wstar->parsed()) {
      std::string dhash = dataset_hash_for(ws.dataset);
      Dataset ds = make_dataset(ws.dataset, ws.dim, false);
      DataStats stats = compute_stats(ds);
      LogisticObjective obj(ds);
      SmoothnessVectors sv = smoothness_vectors(obj, stats);
      WStarOptions wo;
      wo.method = ws.method;
      wo.iterations = ws.iters;
      wo.step = ws.step;
      wo.grad_tol = ws.tol;
      wo.epsilon = ws.epsilon;
      wo.threads = resolve_workers(ws.threads);
      WStarEstimate est = estimate_wstar(obj, wo, sv.l_specbound);
      write_text(ws.out, wstar_json(est, ws.dataset, dhash));
      std::cout << "f*=" << fmt_g(est.f_star) << " |grad|_inf=" << fmt_g(est.grad_norminf)
                << " iters=" << est.iterations
                << (est.plateau_reached ? "" : " (plateau not reached)") << "\n";
      std::cout << "wrote " << ws.out << "\n";
      return 0;
    }

    if (cmd_profile->parsed()) {
      if (prof.fn.empty() == prof.dataset.empty()) {
        std::cerr << "profile needs exactly one of --fn / --dataset\n";
        return 1;
      }
      std::vector<Vec> traj;
      std::vector<int> coords;
      std::unique_ptr<GradientOracle> oracle;
      std::unique_ptr<Dataset> ds;
      if (!prof.fn.empty()) {
        ScalarTestFunction fn;
        double lo = -2.0, hi = 2.0;
        if (prof.fn == "exp") {
          fn.kind = ScalarTestFunction::Kind::exp;
          lo = 0.0;
        } else if (prof.fn == "quartic") {
          fn.kind = ScalarTestFunction::Kind::quartic;
        }
        oracle = std::make_unique<ScalarOracle>(fn);
        // even walk over the domain of interest; pairs stay local
        for (int i = 0; i <= prof.steps; ++i)
          traj.push_back({lo + (hi - lo) * (double)i / (double)prof.steps});
        coords = {0};
      } else {
        ds = std::make_unique<Dataset>(make_dataset(prof.dataset, prof.dim, false));
        DataStats stats = compute_stats(*ds);
        auto obj = std::make_unique<LogisticObjective>(*ds);
        OptimizerConfig oc;
        oc.algo = Algo::adagrad;
        oc.schedule = StepSchedule::constant(prof.lr);
        oc.steps = prof.steps;
        oc.box = BoxSet::unbounded(obj->dim());
        oc.record_every = 1;
        oc.seed = 99;
        RunTrace tr = run(oc, *obj, Vec(obj->dim(), 0.0));
        traj = tr.snapshots;
        // profile the highest-curvature coordinates
        std::vector<int> order(stats.h_diag.size());
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(),
                         [&](int a, int b) { return stats.h_diag[a] > stats.h_diag[b]; });
        for (int i = 0; i < (int)order.size() && i < prof.coords; ++i)
          coords.push_back(order[i]);
        std::sort(coords.begin(), coords.end());
        oracle = std::move(obj);
      }
      SmoothnessProfile sp = profile_generalized_smoothness(*oracle, traj, coords);
      std::ostringstream sc;
      sc << "coord,grad_abs,ratio,iter\n";
      for (const auto& p : sp.scatter)
        sc << p.coord << ',' << fmt_g(p.grad_abs) << ',' << fmt_g(p.ratio) << ',' << p.iter_index
           << '\n';
      std::ostringstream fc;
      fc << "coord,L0,L1,violation_frac,points\n";
      for (const auto& f : sp.fits) {
        fc << f.coord << ',' << fmt_g(f.l0) << ',' << fmt_g(f.l1) << ','
           << fmt_g(f.violation_frac) << ',' << f.points << '\n';
        std::cout << "coord " << f.coord << ": L0=" << fmt_g(f.l0) << " L1=" << fmt_g(f.l1)
                  << " violations=" << fmt_g(f.violation_frac) << " points=" << f.points << "\n";
      }
      write_text(prof.out + "/scatter.csv", sc.str());
      write_text(prof.out + "/fits.csv", fc.str());
      std::cout << "wrote " << prof.out << "/{scatter,fits}.csv\n";
      return 0;
    }

    if (cmd_bounds->parsed()) {
      std::ifstream in(bnd.in);
      if (!in) throw std::runtime_error("cannot open " + bnd.in);
      nlohmann::json j = nlohmann::json::parse(in);
      BoundInputs b;
      auto opt = [&](const char* k) -> std::optional<double> {
        if (j.contains(k)) return j[k].get<double>();
        return std::nullopt;
      };
      b.L_norm1 = opt("L_norm1");
      b.L_norminf = opt("L_norminf");
      b.L0_norm1 = opt("L0_norm1");
      b.L1_norminf = opt("L1_norminf");
      b.sigma_norm1 = opt("sigma_norm1");
      b.sigma_norm2 = opt("sigma_norm2");
      b.D_inf = opt("D_inf");
      b.D_2 = opt("D_2");
      b.Delta = opt("Delta");
      if (j.contains("M")) b.M = j["M"].get<int64_t>();
      if (j.contains("T")) b.T = j["T"].get<int64_t>();
      b.epsilon = j.value("epsilon", 0.0);
      b.d = j.value("d", 0);

      nlohmann::json out = nlohmann::json::object();
      for (const std::string& which : bnd.which) {
        BoundReport r;
        if (which == "adagrad_convex") r = bound_adagrad_convex(b);
        else if (which == "sgd_convex") r = bound_sgd_convex(b);
        else if (which == "adagrad_nonconvex") r = bound_adagrad_nonconvex(b, false);
        else if (which == "adagrad_nonconvex_generalized") r = bound_adagrad_nonconvex(b, true);
        else if (which == "sgd_nonconvex") r = bound_sgd_nonconvex(b);
        else r = bound_adagradnorm_nonconvex(b);
        std::cout << which << ": total=" << fmt_g(r.total)
                  << (r.certified ? " [certified]" : " [order-level]") << "\n";
        nlohmann::json jr;
        for (const auto& t : r.terms) {
          std::cout << "  " << t.name << " = " << fmt_g(t.value) << "\n";
          jr["terms"][t.name] = t.value;
        }
        jr["total"] = r.total;
        jr["certified"] = r.certified;
        jr["note"] = r.note;
        out[which] = jr;
      }
      if (!bnd.out.empty()) {
        write_text(bnd.out, out.dump(2) + "\n");
        std::cout << "wrote " << bnd.out << "\n";
      }
      return 0;
    }

    if (cmd_stats->parsed()) {
      Dataset ds2 = make_dataset(st.dataset, st.dim, false);
      DataStats stats = compute_stats(ds2);
      LogisticObjective obj(ds2);
      SmoothnessVectors sv = smoothness_vectors(obj, stats);
      std::cout << "dataset " << ds2.name << ": n=" << ds2.n() << " dim=" << ds2.dim
                << " avg_nnz=" << fmt_g(ds2.avg_nnz()) << "\n";
      std::cout << "L candidates: |L|_1(diag)=" << fmt_g(sv.l_norm1)
                << " |L|_inf(diag)=" << fmt_g(sv.l_norminf)
                << " spectral=" << fmt_g(sv.l_specbound) << "\n";
      std::cout << "lambda_max(H)=" << fmt_g(stats.lambda_max)
                << " M_1=" << fmt_g(stats.m_p.at(1.0)) << " M_2=" << fmt_g(stats.m_p.at(2.0))
                << "\n";
      if (stats.tail_tau)
        std::cout << "tail fit: tau=" << fmt_g(*stats.tail_tau)
                  << " rms=" << fmt_g(stats.tail_residual) << "\n";
      if (!st.out.empty()) {
        write_text(st.out, stats_csv(ds2, stats, sv));
        std::cout << "wrote " << st.out << "\n";
      }
      if (st.full) {
        bench.cfg.dataset = st.dataset;
        bench.dim = st.dim;
        return run_bench(bench, true);
      }
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
