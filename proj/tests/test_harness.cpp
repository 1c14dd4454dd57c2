#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <cstdlib>
#include <sstream>

#include "anisograd/harness.hpp"
#include "anisograd/synth.hpp"
#include "doctest.h"

using namespace anisograd;

namespace {

Dataset parse_str(const std::string& text, int dim_override = 0) {
  std::istringstream in(text);
  return parse_libsvm(in, "mem", dim_override);
}

// drop lines mentioning wall time; everything else in the report must agree
std::string without_wall(const std::string& s) {
  std::istringstream in(s);
  std::ostringstream out;
  std::string line;
  while (std::getline(in, line))
    if (line.find("wall_s") == std::string::npos) out << line << '\n';
  return out.str();
}

}  // namespace

TEST_CASE("config validation") {
  ExperimentConfig cfg;
  cfg.dataset = "synth:census:n=50";
  validate(cfg);  // defaults are fine
  ExperimentConfig bad = cfg;
  bad.dataset.clear();
  CHECK_THROWS_AS(validate(bad), std::invalid_argument);
  bad = cfg;
  bad.algos.clear();
  CHECK_THROWS_AS(validate(bad), std::invalid_argument);
  bad = cfg;
  bad.lr_grid = {0.1, -1.0};
  CHECK_THROWS_AS(validate(bad), std::invalid_argument);
  bad = cfg;
  bad.schedules = {"warmup"};
  CHECK_THROWS_AS(validate(bad), std::invalid_argument);
  bad = cfg;
  bad.batch_sizes = {0};
  CHECK_THROWS_AS(validate(bad), std::invalid_argument);
  bad = cfg;
  bad.seeds.clear();
  CHECK_THROWS_AS(validate(bad), std::invalid_argument);
  bad = cfg;
  bad.epochs = 0;
  CHECK_THROWS_AS(validate(bad), std::invalid_argument);
  bad.steps_override = 10;
  validate(bad);  // an explicit step budget replaces epochs
  bad = cfg;
  bad.option = ProjOption::I;
  CHECK_THROWS_AS(validate(bad), std::invalid_argument);
  bad.box_halfwidth = 1.0;
  validate(bad);
}

TEST_CASE("w0 draws are deterministic, bounded and seed-keyed") {
  Vec a = draw_w0(50, 0.05, 12345, 1);
  Vec b = draw_w0(50, 0.05, 12345, 1);
  CHECK(a == b);
  CHECK(a != draw_w0(50, 0.05, 12345, 2));
  CHECK(a != draw_w0(50, 0.05, 999, 1));
  for (double x : a) CHECK(std::fabs(x) <= 0.05);
  CHECK(draw_w0(3, 0.0, 1, 1) == Vec{0.0, 0.0, 0.0});
}

TEST_CASE("w* on a quadratic lands on the known optimum") {
  AnisoQuadratic q({2.0, 0.5, 1.0}, {1.0, -2.0, 0.5}, {0.0, 0.0, 0.0});
  WStarOptions opts;
  opts.iterations = 5000;
  opts.grad_tol = 1e-12;
  WStarEstimate est = estimate_wstar(q, opts, /*l_specbound=*/2.0);
  CHECK(est.method == "gd");
  CHECK(est.plateau_reached);
  for (int j = 0; j < 3; ++j)
    CHECK(std::fabs(est.w_star[j] - q.w_star()[j]) < 1e-10);
  CHECK(est.f_star < 1e-20);
  CHECK(est.grad_norminf <= 1e-12);

  WStarOptions ao;
  ao.method = "adagrad";
  ao.iterations = 50000;
  ao.grad_tol = 1e-9;
  WStarEstimate ae = estimate_wstar(q, ao);
  CHECK(ae.f_star < 1e-8);

  WStarOptions bad;
  bad.method = "newton";
  CHECK_THROWS_AS(estimate_wstar(q, bad), std::invalid_argument);
  bad = WStarOptions{};
  bad.iterations = 0;
  CHECK_THROWS_AS(estimate_wstar(q, bad), std::invalid_argument);
  bad = WStarOptions{};
  CHECK_THROWS_AS(estimate_wstar(q, bad), std::invalid_argument);  // gd, no step, no specbound
  bad = WStarOptions{};
  bad.w0 = {1.0};
  bad.step = 0.1;
  CHECK_THROWS_AS(estimate_wstar(q, bad), std::invalid_argument);  // w0 dimension
}

TEST_CASE("w* on a separable dataset never plateaus") {
  // both margins grow with w, so the logistic loss has no finite minimizer
  Dataset ds = parse_str("+1 1:1\n-1 1:-1\n");
  LogisticObjective obj(ds);
  WStarOptions small;
  small.iterations = 200;
  small.step = 4.0;
  WStarEstimate a = estimate_wstar(obj, small);
  WStarOptions big = small;
  big.iterations = 2000;
  WStarEstimate b = estimate_wstar(obj, big);
  CHECK(b.f_star < a.f_star);  // keeps improving with budget
  CHECK(!a.plateau_reached);
  CHECK(!b.plateau_reached);
  CHECK(a.grad_norminf > small.grad_tol);
}

TEST_CASE("w* budget doubling is stable on a non-separable problem") {
  Dataset ds = make_dataset("synth:census:n=2000,seed=8");
  LogisticObjective obj(ds);
  WStarOptions opts;
  opts.method = "adagrad";
  opts.iterations = 8000;
  WStarEstimate half = estimate_wstar(obj, opts);
  opts.iterations = 16000;
  WStarEstimate full = estimate_wstar(obj, opts);
  CHECK(std::fabs(half.f_star - full.f_star) < 1e-5);
  CHECK(full.f_star <= half.f_star);
  CHECK(full.f_star > 0.1);  // genuinely noisy labels, nowhere near separable
}

TEST_CASE("degenerate grid reproduces a single run exactly") {
  Dataset ds = make_dataset("synth:census:n=40,seed=4");
  LogisticObjective obj(ds);
  ExperimentConfig cfg;
  cfg.dataset = "synth:census:n=40,seed=4";
  cfg.algos = {Algo::adagrad};
  cfg.lr_grid = {0.5};
  cfg.schedules = {"constant"};
  cfg.batch_sizes = {8};
  cfg.epochs = 2;
  cfg.seeds = {3};
  cfg.workers = 1;
  ExperimentResult res = run_grid(cfg, obj, 0.1);
  REQUIRE(res.runs.size() == 1);
  REQUIRE(res.cells.size() == 1);
  REQUIRE(res.best.size() == 1);
  CHECK(res.steps_per_epoch == 5);  // ceil(40 / 8)
  CHECK(res.runs[0].steps == 10);

  // replay the same run by hand from the published seed derivation
  OptimizerConfig oc;
  oc.algo = Algo::adagrad;
  oc.schedule = StepSchedule::constant(0.5);
  oc.epsilon = cfg.epsilon;
  oc.batch_size = 8;
  oc.box = BoxSet::unbounded(obj.dim());
  oc.steps = 10;
  oc.seed = mix_seed(mix_seed(0xB17C0DEULL, (uint64_t)Algo::adagrad, 8, 0), 3);
  oc.sampling = cfg.sampling;
  oc.record_every = 5;
  oc.divergence_loss = cfg.divergence_loss;
  RunTrace tr = run(oc, obj, draw_w0(obj.dim(), cfg.w0_halfwidth, cfg.w0_seed, 3));
  CHECK(res.runs[0].final_loss == tr.final_loss);
  CHECK(res.runs[0].avg_loss == tr.avg_loss);
  CHECK(res.runs[0].best_loss == tr.best_loss);
  CHECK(res.traces[0].final_w == tr.final_w);
  CHECK(res.runs[0].gap == doctest::Approx(std::min(tr.final_loss, tr.avg_loss) - 0.1));
  CHECK(res.runs[0].final_gap == doctest::Approx(tr.final_loss - 0.1));
  CHECK(res.cells[0].mean_final == tr.final_loss);
  CHECK(res.best[0].lr == 0.5);
}

TEST_CASE("epoch accounting scales steps with the batch size") {
  Dataset ds = make_dataset("synth:census:n=10,seed=2");
  LogisticObjective obj(ds);
  ExperimentConfig cfg;
  cfg.dataset = "x";
  cfg.algos = {Algo::sgd};
  cfg.lr_grid = {0.1};
  cfg.schedules = {"constant"};
  cfg.batch_sizes = {3};
  cfg.epochs = 3;
  cfg.seeds = {1};
  cfg.workers = 1;
  ExperimentResult res = run_grid(cfg, obj, std::nullopt);
  CHECK(res.runs[0].steps == 12);  // 3 epochs of ceil(10/3) = 4 steps
  CHECK(res.steps_per_epoch == 4);
  // gaps stay NaN without an f* reference
  CHECK(std::isnan(res.runs[0].gap));
}

TEST_CASE("grid outputs are byte-identical across repeated runs and workers") {
  Dataset ds = make_dataset("synth:census:n=60,seed=12");
  LogisticObjective obj(ds);
  DataStats st = compute_stats(ds);
  SmoothnessVectors sv = smoothness_vectors(obj, st);
  WStarOptions wopt;
  wopt.iterations = 2000;
  double f_star = estimate_wstar(obj, wopt, sv.l_specbound).f_star;

  ExperimentConfig cfg;
  cfg.dataset = "synth:census:n=60,seed=12";
  cfg.algos = {Algo::adagrad, Algo::sgd};
  cfg.lr_grid = {1.0, 0.1};
  cfg.schedules = {"constant"};
  cfg.batch_sizes = {1, 4};
  cfg.epochs = 2;
  cfg.seeds = {1, 2};
  cfg.workers = 4;
  ExperimentResult a = run_grid(cfg, obj, f_star);
  cfg.workers = 1;
  ExperimentResult b = run_grid(cfg, obj, f_star);

  CHECK(runs_csv(a, cfg.dataset) == runs_csv(b, cfg.dataset));
  CHECK(cells_csv(a, cfg.dataset) == cells_csv(b, cfg.dataset));
  CHECK(table2_csv(a, cfg.dataset) == table2_csv(b, cfg.dataset));
  CHECK(curves_csv(a, cfg.dataset) == curves_csv(b, cfg.dataset));
  CHECK(without_wall(result_json(cfg, a, "feedbeef")) ==
        without_wall(result_json(cfg, b, "feedbeef")));

  // shape checks on the emitted tables
  CHECK(a.runs.size() == 2 * 2 * 1 * 2 * 2);
  CHECK(a.cells.size() == 2 * 2 * 2);
  CHECK(a.best.size() == 2 * 2);  // one winner per (algo, M)
  std::string t2 = table2_csv(a, cfg.dataset);
  CHECK((size_t)std::count(t2.begin(), t2.end(), '\n') == 1 + a.best.size());
  CHECK(t2.rfind("dataset,algo,M,mean_gap,std_gap,", 0) == 0);
  std::string cv = curves_csv(a, cfg.dataset);
  CHECK(cv.rfind("dataset,algo,M,lr,schedule,seed,step,loss,grad_norm1,grad_norm2\n", 0) == 0);

  // with a converged f* every reported gap is a true gap up to tolerance
  for (const RunResult& rr : a.runs)
    if (!rr.diverged) CHECK(rr.gap >= -1e-6);
}

TEST_CASE("best-cell selection skips diverged cells") {
  Dataset ds = make_dataset("synth:census:n=50,seed=14");
  LogisticObjective obj(ds);
  ExperimentConfig cfg;
  cfg.dataset = "x";
  cfg.algos = {Algo::sgd};
  cfg.lr_grid = {1e6, 0.5};  // the first one explodes
  cfg.schedules = {"constant"};
  cfg.batch_sizes = {4};
  cfg.epochs = 2;
  cfg.seeds = {1, 2};
  cfg.workers = 2;
  cfg.divergence_loss = 50.0;  // anything past this on a logistic run is junk
  ExperimentResult res = run_grid(cfg, obj, std::nullopt);
  bool saw_divergence = false;
  for (const RunResult& rr : res.runs) saw_divergence = saw_divergence || rr.diverged;
  CHECK(saw_divergence);
  REQUIRE(res.best.size() == 1);
  CHECK(res.best[0].lr == 0.5);
  CHECK(!res.best[0].any_diverged);

  // when every cell diverges the report still carries one, flagged
  cfg.lr_grid = {1e6};
  ExperimentResult all_bad = run_grid(cfg, obj, std::nullopt);
  REQUIRE(all_bad.best.size() == 1);
  CHECK(all_bad.best[0].any_diverged);
}

TEST_CASE("loss explosion rule") {
  RunTrace tr;
  CHECK(!loss_exploded(tr));  // nothing recorded, nothing to condemn
  tr.records.push_back({0, 0.5, 0.0, 0.0});
  tr.final_loss = 1.4;
  CHECK(!loss_exploded(tr));  // 1.4 <= max(1.0, 1.5)
  tr.final_loss = 1.6;
  CHECK(loss_exploded(tr));
  tr.final_loss = std::numeric_limits<double>::quiet_NaN();
  CHECK(loss_exploded(tr));
  tr.records[0].loss = 10.0;
  tr.final_loss = 19.0;
  CHECK(!loss_exploded(tr));  // 19 <= max(20, 11)
  tr.final_loss = 21.0;
  CHECK(loss_exploded(tr));
  tr.final_loss = 0.1;
  tr.diverged = true;
  CHECK(loss_exploded(tr));
}

TEST_CASE("table 1 numbers from a box around the optimum") {
  // snapshots at the corners of a hypercube: D_inf = h, D_2 = h sqrt(d)
  const int d = 9;
  const double h = 0.25;
  Vec w_star(d, 1.0);
  RunTrace corner;
  Vec hi = w_star, lo = w_star;
  for (int j = 0; j < d; ++j) {
    hi[j] += h;
    lo[j] -= h;
  }
  corner.snapshots = {hi, lo, w_star};
  corner.records.push_back({0, 1.0, 0.0, 0.0});
  corner.final_loss = 0.5;

  RunTrace blown;  // ended far above its start: excluded from the estimate
  blown.records.push_back({0, 0.5, 0.0, 0.0});
  blown.final_loss = 5.0;
  blown.snapshots = {Vec(d, 100.0)};

  DataStats st;
  st.n = 7;
  st.dim = d;
  st.lambda_max = 3.0;
  st.tail_tau = 0.4;
  SmoothnessVectors sv;
  sv.l_norm1 = 2.0;
  sv.l_norminf = 0.9;
  sv.l_specbound = 0.75;

  Table1Report t = table1_report("toy", {&corner, &blown}, w_star, st, sv);
  CHECK(t.d_inf == h);
  CHECK(t.d_2 == doctest::Approx(h * 3.0).epsilon(1e-15));  // sqrt(9) = 3
  CHECK(t.c_var == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
  CHECK(t.n == 7);
  CHECK(t.dim == d);
  CHECK(t.l_norm1_diag == 2.0);
  CHECK(t.l_specbound == 0.75);
  REQUIRE(t.tail_tau.has_value());
  CHECK(*t.tail_tau == 0.4);

  std::string csv = table1_csv(t);
  CHECK(csv.rfind("dataset,n,dim,D_inf,D_2,C_var,", 0) == 0);
  CHECK(csv.find("toy,7,9,0.25,") != std::string::npos);
}

TEST_CASE("number formatting round-trips") {
  for (double v : {0.1, 1.0 / 3.0, 1e-300, 12345.6789, 2.0, 1e300, -0.0625}) {
    std::string s = fmt_g(v);
    CHECK(std::strtod(s.c_str(), nullptr) == v);
  }
  CHECK(fmt_g(0.1) == "0.1");
  CHECK(fmt_g(2.0) == "2");
  CHECK(fmt_g(std::numeric_limits<double>::quiet_NaN()) == "nan");
}

TEST_CASE("fnv1a reference values") {
  CHECK(fnv1a_hex("") == "cbf29ce484222325");
  CHECK(fnv1a_hex("a") == "af63dc4c8601ec8c");
  CHECK(fnv1a_hex("ab") != fnv1a_hex("ba"));
}

TEST_CASE("file writing and content hashing") {
  std::string path = "/tmp/anisograd_test_hash/sub/file.txt";
  std::string content = "hello,1\nhello,2\n";
  write_text(path, content);
  CHECK(hash_file(path) == fnv1a_hex(content));
  CHECK_THROWS_AS(hash_file("/tmp/anisograd_no_such_file_xyz"), std::runtime_error);
}

TEST_CASE("worker resolution") {
  CHECK(resolve_workers(3) == 3);
  setenv("ANISOGRAD_WORKERS", "7", 1);
  CHECK(resolve_workers(0) == 7);
  CHECK(resolve_workers(2) == 2);  // explicit request beats the env
  unsetenv("ANISOGRAD_WORKERS");
  CHECK(resolve_workers(0) >= 1);
}
