// thin python surface over the C++ core: projection, schedules, dataset
// statistics, single optimizer runs, and the bound/ratio evaluators
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <memory>
#include <optional>

#include "anisograd/analysis.hpp"
#include "anisograd/harness.hpp"
#include "anisograd/synth.hpp"

namespace py = pybind11;
using namespace anisograd;

namespace {

BoundInputs inputs_from_dict(const py::dict& d) {
  BoundInputs b;
  auto opt = [&](const char* k) -> std::optional<double> {
    if (d.contains(k)) return d[k].cast<double>();
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
  if (d.contains("M")) b.M = d["M"].cast<int64_t>();
  if (d.contains("T")) b.T = d["T"].cast<int64_t>();
  if (d.contains("epsilon")) b.epsilon = d["epsilon"].cast<double>();
  if (d.contains("d")) b.d = d["d"].cast<int>();
  return b;
}

py::dict report_to_dict(const BoundReport& r) {
  py::dict terms;
  for (const auto& t : r.terms) terms[t.name.c_str()] = t.value;
  py::dict out;
  out["terms"] = terms;
  out["total"] = r.total;
  out["certified"] = r.certified;
  out["note"] = r.note;
  return out;
}

StepSchedule schedule_from(const std::string& kind, double base, int64_t horizon, double cap) {
  if (kind == "constant") return StepSchedule::constant(base);
  if (kind == "inverse_sqrt") return StepSchedule::inverse_sqrt(base);
  if (kind == "cosine") return StepSchedule::cosine(base, horizon);
  if (kind == "capped_inverse_sqrt") return StepSchedule::capped_inverse_sqrt(cap, base);
  throw std::invalid_argument("unknown schedule kind: " + kind);
}

}  // namespace

PYBIND11_MODULE(_anisograd, m) {
  m.doc() = "anisotropic stochastic optimization toolkit";

  m.def(
      "project",
      [](Vec lower, Vec upper, Vec metric, const Vec& w) {
        BoxSet box = BoxSet::box(std::move(lower), std::move(upper));
        return project(box, DiagMetric(std::move(metric)), w);
      },
      py::arg("lower"), py::arg("upper"), py::arg("metric"), py::arg("w"),
      "metric projection of w onto the box (coordinate-wise clip)");

  m.def(
      "weighted_norm",
      [](const Vec& w, Vec metric) { return weighted_norm(w, DiagMetric(std::move(metric))); },
      py::arg("w"), py::arg("metric"));

  m.def(
      "box_diameters",
      [](Vec lower, Vec upper) {
        BoxDiameters d = box_diameters(BoxSet::box(std::move(lower), std::move(upper)));
        return py::make_tuple(d.d_inf, d.d_2);
      },
      py::arg("lower"), py::arg("upper"));

  m.def(
      "step_size",
      [](const std::string& kind, double base, int64_t t, int64_t horizon, double cap) {
        return step_size(schedule_from(kind, base, horizon, cap), t);
      },
      py::arg("kind"), py::arg("base"), py::arg("t"), py::arg("horizon") = 0,
      py::arg("cap") = 0.0);

  m.def(
      "dataset_stats",
      [](const std::string& spec, int dim) {
        Dataset ds = make_dataset(spec, dim, false);
        DataStats st = compute_stats(ds);
        LogisticObjective obj(ds);
        SmoothnessVectors sv = smoothness_vectors(obj, st);
        py::dict out;
        out["name"] = ds.name;
        out["n"] = st.n;
        out["dim"] = st.dim;
        out["avg_nnz"] = st.avg_nnz;
        out["lambda_max"] = st.lambda_max;
        out["M_1"] = st.m_p.at(1.0);
        out["M_2"] = st.m_p.at(2.0);
        out["L_norm1_diag"] = sv.l_norm1;
        out["L_norminf_diag"] = sv.l_norminf;
        out["L_specbound"] = sv.l_specbound;
        if (st.tail_tau) out["tail_tau"] = *st.tail_tau;
        return out;
      },
      py::arg("spec"), py::arg("dim") = 0);

  m.def(
      "logistic_loss_grad",
      [](const std::string& spec, const Vec& w) {
        Dataset ds = make_dataset(spec, 0, false);
        LogisticObjective obj(ds);
        Vec g;
        double f = obj.loss_grad(w, g, 1);
        return py::make_tuple(f, g);
      },
      py::arg("spec"), py::arg("w"));

  m.def(
      "run_one",
      [](const std::string& spec, const std::string& algo, const std::string& schedule, double lr,
         int batch, int64_t steps, uint64_t seed, double epsilon, int option,
         double box_halfwidth, const std::string& sampling, int64_t record_every) {
        Dataset ds = make_dataset(spec, 0, false);
        LogisticObjective obj(ds);
        OptimizerConfig oc;
        oc.algo = parse_algo(algo);
        oc.option = option == 1 ? ProjOption::I : ProjOption::II;
        oc.schedule = schedule_from(schedule, lr, steps, 0.0);
        oc.epsilon = epsilon;
        oc.batch_size = batch;
        oc.box = box_halfwidth > 0.0 ? BoxSet::hypercube(obj.dim(), box_halfwidth)
                                     : BoxSet::unbounded(obj.dim());
        oc.steps = steps;
        oc.seed = seed;
        oc.sampling = sampling == "epoch" ? Sampling::epoch : Sampling::replacement;
        oc.record_every = record_every;
        oc.record_snapshots = false;
        RunTrace tr = run(oc, obj, Vec(obj.dim(), 0.0));
        py::list records;
        for (const TraceRecord& r : tr.records)
          records.append(py::make_tuple(r.t, r.loss, r.g_norm1, r.g_norm2));
        py::dict out;
        out["final_loss"] = tr.final_loss;
        out["avg_loss"] = tr.avg_loss;
        out["best_loss"] = tr.best_loss;
        out["diverged"] = tr.diverged;
        out["steps"] = tr.steps_done;
        out["final_w"] = tr.final_w;
        out["records"] = records;
        return out;
      },
      py::arg("spec"), py::arg("algo"), py::arg("schedule"), py::arg("lr"), py::arg("batch") = 1,
      py::arg("steps") = 100, py::arg("seed") = 0, py::arg("epsilon") = 1e-10,
      py::arg("option") = 2, py::arg("box_halfwidth") = 0.0, py::arg("sampling") = "replacement",
      py::arg("record_every") = 0);

  m.def(
      "bound",
      [](const std::string& which, const py::dict& inputs) {
        BoundInputs b = inputs_from_dict(inputs);
        if (which == "adagrad_convex") return report_to_dict(bound_adagrad_convex(b));
        if (which == "sgd_convex") return report_to_dict(bound_sgd_convex(b));
        if (which == "adagrad_nonconvex") return report_to_dict(bound_adagrad_nonconvex(b, false));
        if (which == "adagrad_nonconvex_generalized")
          return report_to_dict(bound_adagrad_nonconvex(b, true));
        if (which == "sgd_nonconvex") return report_to_dict(bound_sgd_nonconvex(b));
        if (which == "adagradnorm_nonconvex")
          return report_to_dict(bound_adagradnorm_nonconvex(b));
        throw std::invalid_argument("unknown bound name: " + which);
      },
      py::arg("which"), py::arg("inputs"));

  m.def(
      "ratios",
      [](const py::dict& inputs) {
        RatioReport r = compute_ratios(inputs_from_dict(inputs));
        py::dict out;
        out["R1"] = r.r1;
        out["R2"] = r.r2;
        out["C_var"] = r.c_var;
        return out;
      },
      py::arg("inputs"));

  m.def(
      "theory_step_size",
      [](const std::string& theorem, const py::dict& inputs) {
        StepSchedule s = theory_step_size(theorem, inputs_from_dict(inputs));
        py::dict out;
        out["kind"] = s.name();
        out["base"] = s.base;
        out["cap"] = s.cap;
        return out;
      },
      py::arg("theorem"), py::arg("inputs"));
}
