#include "anisograd/harness.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "json.hpp"

namespace anisograd {

namespace {

int64_t ceil_div(int64_t a, int64_t b) { return (a + b - 1) / b; }

StepSchedule make_schedule(const std::string& name, double lr, int64_t steps) {
  if (name == "constant") return StepSchedule::constant(lr);
  if (name == "inverse_sqrt") return StepSchedule::inverse_sqrt(lr);
  if (name == "cosine") return StepSchedule::cosine(lr, steps);
  throw std::invalid_argument("unknown schedule: " + name);
}

// min over the values that are finite; NaN only if none are
double finite_min(double a, double b) {
  if (!std::isfinite(a)) return b;
  if (!std::isfinite(b)) return a;
  return std::min(a, b);
}

}  // namespace

void validate(const ExperimentConfig& cfg) {
  if (cfg.dataset.empty()) throw std::invalid_argument("config: dataset is empty");
  if (cfg.algos.empty()) throw std::invalid_argument("config: no algorithms");
  if (cfg.lr_grid.empty()) throw std::invalid_argument("config: empty lr grid");
  if (cfg.schedules.empty()) throw std::invalid_argument("config: empty schedule set");
  if (cfg.batch_sizes.empty()) throw std::invalid_argument("config: empty batch size set");
  if (cfg.seeds.empty()) throw std::invalid_argument("config: empty seed set");
  if (cfg.epochs < 1 && cfg.steps_override < 1)
    throw std::invalid_argument("config: epochs must be >= 1");
  for (double lr : cfg.lr_grid)
    if (!(lr > 0.0)) throw std::invalid_argument("config: lr grid entries must be > 0");
  for (int m : cfg.batch_sizes)
    if (m < 1) throw std::invalid_argument("config: batch sizes must be >= 1");
  for (const auto& s : cfg.schedules) make_schedule(s, 1.0, 1);  // name check
  if (!(cfg.w0_halfwidth >= 0.0)) throw std::invalid_argument("config: w0 halfwidth must be >= 0");
  if (cfg.epsilon < 0.0) throw std::invalid_argument("config: epsilon must be >= 0");
  if (cfg.option == ProjOption::I && !(cfg.box_halfwidth > 0.0))
    throw std::invalid_argument("config: Option I needs box halfwidth > 0");
}

Vec draw_w0(int dim, double halfwidth, uint64_t w0_seed, uint64_t seed) {
  std::mt19937_64 rng(mix_seed(w0_seed, seed));
  std::uniform_real_distribution<double> u(-halfwidth, halfwidth);
  Vec w(dim);
  for (auto& x : w) x = u(rng);
  return w;
}

WStarEstimate estimate_wstar(const GradientOracle& oracle, const WStarOptions& opts,
                             double l_specbound) {
  if (opts.method != "gd" && opts.method != "adagrad")
    throw std::invalid_argument("estimate_wstar: method must be gd or adagrad");
  if (opts.iterations < 1) throw std::invalid_argument("estimate_wstar: iterations must be >= 1");
  const int d = oracle.dim();
  Vec w = opts.w0;
  if (w.empty()) w.assign(d, 0.0);
  if ((int)w.size() != d) throw std::invalid_argument("estimate_wstar: w0 dimension mismatch");

  double step = opts.step;
  if (step <= 0.0) {
    if (opts.method == "gd") {
      if (!(l_specbound > 0.0))
        throw std::invalid_argument("estimate_wstar: gd needs an explicit step or l_specbound");
      step = 1.0 / l_specbound;
    } else {
      step = 1.0;
    }
  }

  Vec g(d);
  double f = oracle.loss_grad(w, g, opts.threads);
  if (!std::isfinite(f)) throw std::runtime_error("estimate_wstar: non-finite loss at start");

  WStarEstimate est;
  est.method = opts.method;
  est.w_star = w;
  est.f_star = f;
  est.grad_norminf = norminf(g);

  Vec v(d, opts.epsilon * opts.epsilon);  // adagrad accumulator
  Vec w_try(d), g_try(d);
  int64_t it = 0;
  for (; it < opts.iterations; ++it) {
    if (norminf(g) <= opts.grad_tol) break;
    if (opts.method == "gd") {
      for (int j = 0; j < d; ++j) w_try[j] = w[j] - step * g[j];
      double f_try = oracle.loss_grad(w_try, g_try, opts.threads);
      if (!std::isfinite(f_try) || f_try >= f) {
        step *= 0.5;  // backtrack, keep the current iterate
        if (step < 1e-300) break;
        continue;
      }
      w.swap(w_try);
      g.swap(g_try);
      f = f_try;
    } else {
      for (int j = 0; j < d; ++j) {
        v[j] += g[j] * g[j];
        double lam = std::sqrt(v[j]);
        if (lam > 0.0) w[j] -= step * g[j] / lam;
      }
      f = oracle.loss_grad(w, g, opts.threads);
      if (!std::isfinite(f)) throw std::runtime_error("estimate_wstar: non-finite loss");
    }
    if (f < est.f_star) {
      est.f_star = f;
      est.w_star = w;
      est.grad_norminf = norminf(g);
    }
  }
  est.iterations = it;
  est.plateau_reached = est.grad_norminf <= opts.grad_tol;
  return est;
}

bool loss_exploded(const RunTrace& tr) {
  if (tr.diverged) return true;
  if (tr.records.empty()) return false;
  double first = tr.records.front().loss;
  double last = tr.final_loss;
  if (!std::isfinite(last)) return true;
  return last > std::max(first * 2.0, first + 1.0);
}

ExperimentResult run_grid(const ExperimentConfig& cfg, const GradientOracle& oracle,
                          std::optional<double> f_star) {
  validate(cfg);
  const int d = oracle.dim();
  const int64_t n = oracle.num_samples();
  if (n == 0 && cfg.steps_override < 1)
    throw std::invalid_argument("run_grid: distribution oracle needs steps_override");

  struct Job {
    Algo algo;
    int batch;
    double lr;
    std::string schedule;
    uint64_t seed;
    uint64_t cell;
    int64_t steps;
    int64_t record_every;
  };
  std::vector<Job> jobs;
  for (Algo algo : cfg.algos)
    for (int m : cfg.batch_sizes) {
      int64_t per_epoch = n > 0 ? ceil_div(n, m) : 0;
      int64_t steps = cfg.steps_override > 0 ? cfg.steps_override : (int64_t)cfg.epochs * per_epoch;
      int64_t rec = cfg.record_every > 0 ? cfg.record_every
                                         : (per_epoch > 0 ? per_epoch : std::max<int64_t>(1, steps / 100));
      uint64_t cell = 0;
      for (double lr : cfg.lr_grid)
        for (const auto& sched : cfg.schedules) {
          for (uint64_t seed : cfg.seeds)
            jobs.push_back({algo, m, lr, sched, seed, cell, steps, rec});
          ++cell;
        }
    }

  ExperimentResult out;
  out.f_star = f_star.value_or(std::numeric_limits<double>::quiet_NaN());
  out.steps_per_epoch = n > 0 ? ceil_div(n, cfg.batch_sizes.front()) : 0;
  out.runs.resize(jobs.size());
  out.traces.resize(jobs.size());

  std::atomic<size_t> next{0};
  auto worker = [&]() {
    for (;;) {
      size_t i = next.fetch_add(1);
      if (i >= jobs.size()) return;
      const Job& jb = jobs[i];
      OptimizerConfig oc;
      oc.algo = jb.algo;
      oc.option = cfg.option;
      oc.schedule = make_schedule(jb.schedule, jb.lr, jb.steps);
      oc.epsilon = cfg.epsilon;
      oc.batch_size = jb.batch;
      oc.box = cfg.box_halfwidth > 0.0 ? BoxSet::hypercube(d, cfg.box_halfwidth)
                                       : BoxSet::unbounded(d);
      oc.steps = jb.steps;
      oc.seed = mix_seed(mix_seed(0xB17C0DEULL, (uint64_t)jb.algo, (uint64_t)jb.batch, jb.cell),
                         jb.seed);
      oc.sampling = cfg.sampling;
      oc.record_every = jb.record_every;
      oc.divergence_loss = cfg.divergence_loss;
      Vec w0 = draw_w0(d, cfg.w0_halfwidth, cfg.w0_seed, jb.seed);

      auto t0 = std::chrono::steady_clock::now();
      RunTrace tr = run(oc, oracle, w0);
      std::chrono::duration<double> dt = std::chrono::steady_clock::now() - t0;

      RunResult rr;
      rr.algo = jb.algo;
      rr.batch = jb.batch;
      rr.lr = jb.lr;
      rr.schedule = jb.schedule;
      rr.seed = jb.seed;
      rr.steps = tr.steps_done;
      rr.final_loss = tr.final_loss;
      rr.avg_loss = tr.avg_loss;
      rr.best_loss = tr.best_loss;
      rr.diverged = tr.diverged;
      rr.wall_s = dt.count();
      if (f_star) {
        rr.final_gap = tr.final_loss - *f_star;
        rr.avg_gap = tr.avg_loss - *f_star;
        rr.gap = finite_min(tr.final_loss, tr.avg_loss) - *f_star;
      }
      out.runs[i] = std::move(rr);
      out.traces[i] = std::move(tr);
    }
  };
  int nworkers = std::min<int>(resolve_workers(cfg.workers), (int)jobs.size());
  std::vector<std::thread> pool;
  for (int i = 1; i < nworkers; ++i) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();

  // aggregate per cell, then pick the best cell per (algo, M) by mean headline
  // training loss (best of final and averaged iterate, matching the reported
  // gap), skipping cells with a diverged seed when possible
  const size_t k = cfg.seeds.size();
  const size_t cells_per_bm = cfg.lr_grid.size() * cfg.schedules.size();
  size_t idx = 0;
  for (size_t ai = 0; ai < cfg.algos.size(); ++ai)
    for (size_t bi = 0; bi < cfg.batch_sizes.size(); ++bi) {
      size_t group_start = out.cells.size();
      for (size_t ci = 0; ci < cells_per_bm; ++ci) {
        CellAggregate cell;
        cell.algo = cfg.algos[ai];
        cell.batch = cfg.batch_sizes[bi];
        cell.lr = out.runs[idx].lr;
        cell.schedule = out.runs[idx].schedule;
        cell.seeds = (int)k;
        std::vector<double> gaps, fgaps, agaps;
        for (size_t s = 0; s < k; ++s) {
          const RunResult& rr = out.runs[idx + s];
          cell.mean_final += rr.final_loss;
          cell.mean_headline += finite_min(rr.final_loss, rr.avg_loss);
          cell.any_diverged = cell.any_diverged || rr.diverged;
          gaps.push_back(rr.gap);
          fgaps.push_back(rr.final_gap);
          agaps.push_back(rr.avg_gap);
        }
        cell.mean_final /= (double)k;
        cell.mean_headline /= (double)k;
        auto mean_std = [&](const std::vector<double>& xs, double& mean, double& sd) {
          mean = 0.0;
          for (double x : xs) mean += x;
          mean /= (double)xs.size();
          sd = 0.0;
          if (xs.size() > 1) {
            for (double x : xs) sd += (x - mean) * (x - mean);
            sd = std::sqrt(sd / (double)(xs.size() - 1));
          }
        };
        mean_std(gaps, cell.mean_gap, cell.std_gap);
        mean_std(fgaps, cell.mean_final_gap, cell.std_final_gap);
        mean_std(agaps, cell.mean_avg_gap, cell.std_avg_gap);
        out.cells.push_back(cell);
        idx += k;
      }
      const CellAggregate* pick = nullptr;
      for (size_t ci = 0; ci < cells_per_bm; ++ci) {
        const CellAggregate& c = out.cells[group_start + ci];
        if (c.any_diverged) continue;
        if (!pick || c.mean_headline < pick->mean_headline) pick = &c;
      }
      if (!pick) {  // every cell diverged: report the least bad one, still flagged
        for (size_t ci = 0; ci < cells_per_bm; ++ci) {
          const CellAggregate& c = out.cells[group_start + ci];
          if (!pick || c.mean_headline < pick->mean_headline) pick = &c;
        }
      }
      out.best.push_back(*pick);
    }
  return out;
}

Table1Report table1_report(const std::string& dataset, const std::vector<const RunTrace*>& traces,
                           const Vec& w_star, const DataStats& stats,
                           const SmoothnessVectors& sv) {
  std::vector<const RunTrace*> kept;
  for (const RunTrace* tr : traces)
    if (tr && !loss_exploded(*tr)) kept.push_back(tr);
  DiameterEstimate de = estimate_diameters(kept, w_star);

  Table1Report t;
  t.dataset = dataset;
  t.n = stats.n;
  t.dim = stats.dim;
  t.d_inf = de.d_inf;
  t.d_2 = de.d_2;
  t.c_var = de.d_2 > 0.0 ? de.d_inf / de.d_2 : 0.0;
  t.l_norm1_diag = sv.l_norm1;
  t.l_norminf_diag = sv.l_norminf;
  t.l_specbound = sv.l_specbound;
  t.lambda_max = stats.lambda_max;
  t.tail_tau = stats.tail_tau;
  return t;
}

std::string fmt_g(double v) {
  char buf[40];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

namespace {

std::string algo_label(Algo a) { return algo_name(a); }

void csv_run_rows(std::ostringstream& os, const ExperimentResult& r, const std::string& dataset) {
  for (const RunResult& rr : r.runs) {
    os << dataset << ',' << algo_label(rr.algo) << ',' << rr.batch << ',' << fmt_g(rr.lr) << ','
       << rr.schedule << ',' << rr.seed << ',' << rr.steps << ',' << fmt_g(rr.final_loss) << ','
       << fmt_g(rr.avg_loss) << ',' << fmt_g(rr.best_loss) << ',' << fmt_g(rr.final_gap) << ','
       << fmt_g(rr.avg_gap) << ',' << fmt_g(rr.gap) << ',' << (rr.diverged ? 1 : 0) << '\n';
  }
}

void csv_cell_row(std::ostringstream& os, const CellAggregate& c, const std::string& dataset) {
  os << dataset << ',' << algo_label(c.algo) << ',' << c.batch << ',' << fmt_g(c.mean_gap) << ','
     << fmt_g(c.std_gap) << ',' << fmt_g(c.lr) << ',' << c.schedule << ',' << c.seeds << ','
     << fmt_g(c.mean_final) << ',' << fmt_g(c.mean_headline) << ',' << fmt_g(c.mean_final_gap)
     << ',' << fmt_g(c.std_final_gap) << ',' << fmt_g(c.mean_avg_gap) << ','
     << fmt_g(c.std_avg_gap) << ',' << (c.any_diverged ? 1 : 0) << '\n';
}

constexpr const char* kCellHeader =
    "dataset,algo,M,mean_gap,std_gap,lr,schedule,seeds,mean_final,mean_headline,"
    "mean_final_gap,std_final_gap,mean_avg_gap,std_avg_gap,any_diverged\n";

}  // namespace

std::string runs_csv(const ExperimentResult& r, const std::string& dataset) {
  std::ostringstream os;
  os << "dataset,algo,M,lr,schedule,seed,steps,final_loss,avg_loss,best_loss,final_gap,"
        "avg_gap,gap,diverged\n";
  csv_run_rows(os, r, dataset);
  return os.str();
}

std::string cells_csv(const ExperimentResult& r, const std::string& dataset) {
  std::ostringstream os;
  os << kCellHeader;
  for (const CellAggregate& c : r.cells) csv_cell_row(os, c, dataset);
  return os.str();
}

std::string table2_csv(const ExperimentResult& r, const std::string& dataset) {
  std::ostringstream os;
  os << kCellHeader;
  for (const CellAggregate& c : r.best) csv_cell_row(os, c, dataset);
  return os.str();
}

std::string curves_csv(const ExperimentResult& r, const std::string& dataset) {
  std::ostringstream os;
  os << "dataset,algo,M,lr,schedule,seed,step,loss,grad_norm1,grad_norm2\n";
  for (size_t i = 0; i < r.runs.size(); ++i) {
    const RunResult& rr = r.runs[i];
    for (const TraceRecord& rec : r.traces[i].records) {
      os << dataset << ',' << algo_label(rr.algo) << ',' << rr.batch << ',' << fmt_g(rr.lr) << ','
         << rr.schedule << ',' << rr.seed << ',' << rec.t << ',' << fmt_g(rec.loss) << ','
         << fmt_g(rec.g_norm1) << ',' << fmt_g(rec.g_norm2) << '\n';
    }
  }
  return os.str();
}

std::string table1_csv(const Table1Report& t) {
  std::ostringstream os;
  os << "dataset,n,dim,D_inf,D_2,C_var,L1_diag,Linf_diag,L_specbound,lambda_max,tail_tau\n";
  os << t.dataset << ',' << t.n << ',' << t.dim << ',' << fmt_g(t.d_inf) << ',' << fmt_g(t.d_2)
     << ',' << fmt_g(t.c_var) << ',' << fmt_g(t.l_norm1_diag) << ',' << fmt_g(t.l_norminf_diag)
     << ',' << fmt_g(t.l_specbound) << ',' << fmt_g(t.lambda_max) << ','
     << (t.tail_tau ? fmt_g(*t.tail_tau) : "") << '\n';
  return os.str();
}

std::string result_json(const ExperimentConfig& cfg, const ExperimentResult& r,
                        const std::string& dataset_hash) {
  nlohmann::json jcfg;
  jcfg["dataset"] = cfg.dataset;
  if (cfg.dim_override) jcfg["dim_override"] = *cfg.dim_override;
  std::vector<std::string> algos;
  for (Algo a : cfg.algos) algos.push_back(algo_name(a));
  jcfg["algos"] = algos;
  jcfg["lr_grid"] = cfg.lr_grid;
  jcfg["schedules"] = cfg.schedules;
  jcfg["batch_sizes"] = cfg.batch_sizes;
  jcfg["epochs"] = cfg.epochs;
  jcfg["seeds"] = cfg.seeds;
  jcfg["w0_halfwidth"] = cfg.w0_halfwidth;
  jcfg["w0_seed"] = cfg.w0_seed;
  jcfg["epsilon"] = cfg.epsilon;
  jcfg["option"] = cfg.option == ProjOption::I ? 1 : 2;
  jcfg["box_halfwidth"] = cfg.box_halfwidth;
  jcfg["sampling"] = cfg.sampling == Sampling::epoch ? "epoch" : "replacement";
  jcfg["steps_override"] = cfg.steps_override;
  jcfg["record_every"] = cfg.record_every;
  jcfg["divergence_loss"] = cfg.divergence_loss;

  nlohmann::json j;
  j["config"] = jcfg;
  j["config_hash"] = fnv1a_hex(jcfg.dump());
  j["dataset_hash"] = dataset_hash;
  j["f_star"] = r.f_star;
  j["steps_per_epoch"] = r.steps_per_epoch;
  nlohmann::json jruns = nlohmann::json::array();
  for (const RunResult& rr : r.runs) {
    nlohmann::json jr;
    jr["algo"] = algo_name(rr.algo);
    jr["M"] = rr.batch;
    jr["lr"] = rr.lr;
    jr["schedule"] = rr.schedule;
    jr["seed"] = rr.seed;
    jr["steps"] = rr.steps;
    jr["final_loss"] = rr.final_loss;
    jr["avg_loss"] = rr.avg_loss;
    jr["gap"] = rr.gap;
    jr["diverged"] = rr.diverged;
    jr["wall_s"] = rr.wall_s;
    jruns.push_back(jr);
  }
  j["runs"] = jruns;
  nlohmann::json jbest = nlohmann::json::array();
  for (const CellAggregate& c : r.best) {
    nlohmann::json jc;
    jc["algo"] = algo_name(c.algo);
    jc["M"] = c.batch;
    jc["lr"] = c.lr;
    jc["schedule"] = c.schedule;
    jc["mean_gap"] = c.mean_gap;
    jc["std_gap"] = c.std_gap;
    jc["mean_headline"] = c.mean_headline;
    jc["any_diverged"] = c.any_diverged;
    jbest.push_back(jc);
  }
  j["best"] = jbest;
  return j.dump(2) + "\n";
}

std::string fnv1a_hex(const std::string& bytes) {
  uint64_t h = 14695981039346656037ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  char buf[17];
  static const char* hexd = "0123456789abcdef";
  for (int i = 15; i >= 0; --i) {
    buf[i] = hexd[h & 0xF];
    h >>= 4;
  }
  return std::string(buf, 16);
}

std::string hash_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("hash_file: cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return fnv1a_hex(ss.str());
}

void write_text(const std::string& path, const std::string& content) {
  std::filesystem::path p(path);
  if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
  std::ofstream out(p, std::ios::binary);
  if (!out) throw std::runtime_error("write_text: cannot open " + path);
  out << content;
  if (!out) throw std::runtime_error("write_text: short write to " + path);
}

int resolve_workers(int requested) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("ANISOGRAD_WORKERS")) {
    char* end = nullptr;
    long v = std::strtol(env, &end, 10);
    if (end != env && v > 0) return (int)v;
  }
  unsigned hw = std::thread::hardware_concurrency();
  return hw > 0 ? (int)hw : 1;
}

}  // namespace anisograd
