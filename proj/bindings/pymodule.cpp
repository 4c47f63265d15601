#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "erwlab/coupling.hpp"
#include "erwlab/estimators.hpp"
#include "erwlab/harness.hpp"
#include "erwlab/oracle.hpp"
#include "erwlab/renewal.hpp"
#include "erwlab/walk.hpp"
#include "erwlab/weights.hpp"

namespace py = pybind11;
using namespace erwlab;

namespace {

WalkParams make_params(int d, const py::object& m, double beta,
                       const std::string& kind) {
  if (kind == "symmetric") return WalkParams::symmetric(d);
  if (kind == "biased_srw" || kind == "srw" || m.is_none())
    return WalkParams::biased_srw(d, beta);
  if (kind != "merw") throw error(errc::config, "kind must be merw|srw|symmetric");
  return WalkParams::merw(d, m.cast<std::uint32_t>(), beta);
}

py::dict estimate_dict(const Estimate& e) {
  py::dict out;
  out["observable"] = e.observable;
  out["count"] = e.count;
  out["mean"] = e.mean;
  out["stderr"] = e.stderr_est;
  out["method"] = e.method;
  return out;
}

}  // namespace

PYBIND11_MODULE(_erwlab, mod) {
  mod.doc() = "excited random walk laboratory: simulation, renewal cycles, "
              "likelihood-ratio derivative estimation, exact enumeration";

  py::register_exception<error>(mod, "ErwlabError");

  py::class_<Trajectory>(mod, "Trajectory")
      .def_readonly("d", &Trajectory::d)
      .def_readonly("steps", &Trajectory::steps)
      .def_readonly("coords", &Trajectory::coords)
      .def_readonly("xs", &Trajectory::xs)
      .def_readonly("eps", &Trajectory::eps)
      .def_readonly("novelty", &Trajectory::novelty)
      .def_readonly("excited", &Trajectory::excited)
      .def("novelty_count", &Trajectory::novelty_count)
      .def("excited_count", &Trajectory::excited_count)
      .def("range_count", &Trajectory::range_count);

  mod.def(
      "step_probabilities",
      [](int d, const py::object& m, double beta, const std::string& kind,
         bool excited) {
        return step_probabilities(make_params(d, m, beta, kind), excited);
      },
      py::arg("d"), py::arg("m") = 1, py::arg("beta") = 0.0,
      py::arg("kind") = "merw", py::arg("excited") = true);

  mod.def(
      "simulate",
      [](int d, const py::object& m, double beta, std::int64_t steps,
         std::uint64_t seed, const std::string& kind) {
        return simulate_trajectory(make_params(d, m, beta, kind), steps, seed);
      },
      py::arg("d"), py::arg("m"), py::arg("beta"), py::arg("steps"),
      py::arg("seed"), py::arg("kind") = "merw");

  mod.def(
      "window_novelty",
      [](const Trajectory& t, int k) { return annotate_window_novelty(t, k); },
      py::arg("trajectory"), py::arg("k"));

  auto record_dict = [](const RenewalRecord& r) {
    py::dict out;
    out["taus"] = r.taus;
    out["horizon"] = r.horizon;
    out["confirm_margin"] = r.confirm_margin;
    out["censored_tail"] = r.censored_tail;
    return out;
  };
  mod.def(
      "detect_direct",
      [record_dict](const std::vector<std::int64_t>& xs, std::int64_t margin) {
        return record_dict(detect_direct(std::span<const std::int64_t>(xs), margin));
      },
      py::arg("xs"), py::arg("confirm_margin") = 0);
  mod.def(
      "detect_sd",
      [record_dict](const std::vector<std::int64_t>& xs, std::int64_t margin) {
        return record_dict(detect_sd(std::span<const std::int64_t>(xs), margin));
      },
      py::arg("xs"), py::arg("confirm_margin") = 0);

  mod.def(
      "extract_cycles",
      [](const Trajectory& t, double beta0, const std::string& flags,
         std::int64_t margin) {
        auto rec = detect_direct(t, margin);
        auto cycles = extract_cycles(
            t, rec, beta0,
            flags == "novelty" ? FlagSource::novelty : FlagSource::excitation);
        py::list out;
        for (const auto& c : cycles) {
          py::dict e;
          e["k"] = c.k;
          e["dt"] = c.dt;
          e["dx"] = c.dx;
          e["dn"] = c.dn;
          e["dv"] = c.dv;
          out.append(e);
        }
        return out;
      },
      py::arg("trajectory"), py::arg("beta0"), py::arg("flags") = "excitation",
      py::arg("confirm_margin") = 0);

  mod.def(
      "path_weight",
      [](const std::vector<std::int8_t>& eps, const std::vector<std::uint8_t>& flags,
         double beta, double beta0) {
        auto s = weigh_path(eps, flags, beta, beta0);
        return py::make_tuple(s.log_m, s.v_score);
      },
      py::arg("eps"), py::arg("flags"), py::arg("beta"), py::arg("beta0"));

  mod.def(
      "reweighted_mean",
      [](const std::vector<double>& values, const std::vector<double>& logw) {
        auto r = reweighted_mean(values, logw);
        py::dict out;
        out["mean"] = r.mean;
        out["stderr"] = r.stderr_est;
        out["ess"] = r.ess;
        out["n_finite"] = r.n_finite;
        return out;
      },
      py::arg("values"), py::arg("log_weights"));

  mod.def(
      "exact_expectation",
      [](int d, const py::object& m, double beta, int n, const std::string& obs,
         std::int64_t budget) {
        const WalkParams p = make_params(d, m, beta, "merw");
        PathObservable f;
        if (obs == "one") f = [](const PathTerm&) { return 1.0; };
        else if (obs == "x") f = [](const PathTerm& t) { return double(t.x_n); };
        else if (obs == "n")
          f = [](const PathTerm& t) { return double(t.novelty_count()); };
        else throw error(errc::config, "obs must be one|x|n");
        return exact_expectation(p, n, f, budget);
      },
      py::arg("d"), py::arg("m"), py::arg("beta"), py::arg("n"), py::arg("obs"),
      py::arg("budget") = kDefaultAtomBudget);

  mod.def(
      "exact_speed_and_derivative",
      [](int d, const py::object& m, double beta, int n, double h, bool richardson) {
        auto sd = exact_speed_and_derivative(make_params(d, m, beta, "merw"), n, h,
                                             richardson);
        py::dict out;
        out["v_n"] = sd.v;
        out["dv_fd"] = sd.dv_fd;
        out["dv_formula"] =
            exact_derivative_formula(make_params(d, m, beta, "merw"), n);
        return out;
      },
      py::arg("d"), py::arg("m"), py::arg("beta"), py::arg("n"),
      py::arg("h") = 1e-4, py::arg("richardson") = false);

  mod.def(
      "girsanov_check",
      [](int d, const py::object& m, double beta, double beta0, int n) {
        return girsanov_check(make_params(d, m, beta, "merw"), beta, beta0, n);
      },
      py::arg("d"), py::arg("m"), py::arg("beta"), py::arg("beta0"), py::arg("n"));

  mod.def(
      "coupled_pair_check",
      [](int d, double beta0, double beta, std::uint32_t m, std::int64_t horizon,
         std::int64_t burnin, std::uint64_t seed) {
        if (burnin < 0) burnin = default_burnin(horizon);
        auto pair = build_pair(sample_noise(d, beta0, beta, horizon, burnin, seed), m);
        auto rep = verify(pair);
        py::dict out;
        out["dominance_ok"] = rep.dominance_ok;
        out["first_violation"] = rep.first_violation;
        out["shared_renewals_ok"] = rep.shared_renewals_ok;
        out["renewals_checked"] = rep.renewals_checked;
        out["xbar_final"] = pair.ybar.xs.back();
        out["x_final"] = pair.y.xs.back();
        return out;
      },
      py::arg("d"), py::arg("beta0"), py::arg("beta"), py::arg("m"),
      py::arg("horizon"), py::arg("burnin") = -1, py::arg("seed") = 1);

  mod.def(
      "run_experiment",
      [](const std::string& config_json) {
        return results_to_json(run_experiment(config_from_json(config_json)));
      },
      py::arg("config_json"),
      "Run a full experiment from a JSON config string; returns results JSON.");
}
