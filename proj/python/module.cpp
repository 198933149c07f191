#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "rds/bounds.hpp"
#include "rds/error.hpp"
#include "rds/eval.hpp"
#include "rds/experiments.hpp"
#include "rds/limits.hpp"
#include "rds/zeros.hpp"

namespace py = pybind11;
using namespace rds;

namespace {

using SeqPtr = std::shared_ptr<FrequencySequence>;

SeqPtr make_seq(FrequencySequence s) { return std::make_shared<FrequencySequence>(std::move(s)); }

py::dict scan_dict(const SignScanReport& r) {
  py::dict d;
  std::string decided, combined;
  for (const Sign s : r.decided_signs) decided += to_char(s);
  for (const Sign s : r.heuristic_signs) combined += to_char(s);
  d["sigma_grid"] = r.sigma_grid;
  d["decided_signs"] = decided;
  d["combined_signs"] = combined;
  d["sign_changes"] = r.sign_changes;
  d["combined_sign_changes"] = r.combined_sign_changes;
  d["sign_change_brackets"] = r.sign_change_brackets;
  d["undecided_measure"] = r.undecided_measure;
  d["no_zero_certified"] = r.no_zero_certified;
  d["resolution_reached"] = r.resolution_reached;
  d["eta_total"] = r.eta_total;
  d["closure_sigma"] = r.closure_sigma ? py::object(py::float_(*r.closure_sigma)) : py::object(py::none());
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Random Dirichlet series laboratory";

  // translators run newest first, so the base class goes first
  py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<ResourceError>(m, "ResourceError", PyExc_RuntimeError);
  py::register_exception<ValidationError>(m, "ValidationError", PyExc_ValueError);

  py::class_<FrequencySequence, SeqPtr>(m, "FrequencySequence")
      .def_static("naturals", [](std::int64_t start) { return make_seq(FrequencySequence::naturals(start)); },
                  py::arg("start_index") = 1)
      .def_static("primes", [](std::int64_t start) { return make_seq(FrequencySequence::primes(start)); },
                  py::arg("start_index") = 1)
      .def_static("weighted_naturals",
                  [](double a, std::int64_t start) { return make_seq(FrequencySequence::weighted_naturals(a, start)); },
                  py::arg("exponent"), py::arg("start_index") = 2)
      .def_static("explicit",
                  [](std::vector<double> v, std::int64_t start) {
                    return make_seq(FrequencySequence::explicit_values(std::move(v), start));
                  },
                  py::arg("values"), py::arg("start_index") = 1)
      .def("element", &FrequencySequence::element)
      .def("count_le", &FrequencySequence::count_le)
      .def_property_readonly("start_index", &FrequencySequence::start_index)
      .def_property_readonly("is_finite", &FrequencySequence::is_finite)
      .def("__repr__", &FrequencySequence::describe);

  m.def("counting_function", &counting_function);
  m.def("power_sum", &power_sum, py::arg("seq"), py::arg("sigma"), py::arg("cutoff"));
  m.def("tail_power_sum", [](const FrequencySequence& s, double sigma, double cutoff) {
    const auto e = tail_power_sum(s, sigma, cutoff);
    return std::make_pair(e.lower, e.upper);
  });

  py::class_<SamplePath>(m, "SamplePath")
      .def_static("random",
                  [](SeqPtr seq, std::uint64_t seed, std::uint64_t trial) { return SamplePath::random(seq, seed, trial); },
                  py::arg("seq"), py::arg("seed"), py::arg("trial") = 0)
      .def_static("constant", [](SeqPtr seq, int sign) { return SamplePath::constant(seq, sign); }, py::arg("seq"),
                  py::arg("sign") = 1)
      .def("sign_at", &SamplePath::sign_at)
      .def("flipped", &SamplePath::flipped)
      .def("forced", [](const SamplePath& p, const std::map<std::int64_t, int>& a) { return forced_path(a, p); })
      .def("force_up_to", [](const SamplePath& p, double cutoff, int sign) { return force_up_to(p, cutoff, sign); },
           py::arg("cutoff"), py::arg("sign") = 1);

  py::class_<CertifiedValue>(m, "CertifiedValue")
      .def_readonly("sigma", &CertifiedValue::sigma)
      .def_readonly("partial_sum", &CertifiedValue::partial_sum)
      .def_readonly("cutoff", &CertifiedValue::cutoff)
      .def_readonly("error_radius", &CertifiedValue::error_radius)
      .def_readonly("eta", &CertifiedValue::eta)
      .def_property_readonly("certificate", [](const CertifiedValue& v) { return std::string(to_string(v.certificate)); })
      .def("sign", &CertifiedValue::sign);

  py::class_<TailCertificate>(m, "TailCertificate")
      .def_readonly("sigma0", &TailCertificate::sigma0)
      .def_readonly("cutoff", &TailCertificate::cutoff)
      .def_readonly("tail_variance", &TailCertificate::tail_variance)
      .def_readonly("sup_bound", &TailCertificate::sup_bound)
      .def_readonly("eta", &TailCertificate::eta)
      .def("radius", &TailCertificate::radius);

  m.def("partial_sum", &partial_sum, py::arg("path"), py::arg("sigma"), py::arg("cutoff"));
  m.def("tail_certificate", &tail_certificate, py::arg("seq"), py::arg("sigma0"), py::arg("cutoff"), py::arg("eta"));
  m.def("evaluate", &evaluate, py::arg("path"), py::arg("sigma"), py::arg("cert"));
  m.def("evaluate_deterministic", &evaluate_deterministic);
  m.def("evaluate_heuristic", &evaluate_heuristic, py::arg("path"), py::arg("sigma"), py::arg("min_cutoff") = 1.0);
  m.def("heuristic_cutoff", &heuristic_cutoff);
  m.def("mellin_check", &mellin_check, py::arg("path"), py::arg("s"), py::arg("x_max"));

  m.def(
      "scan",
      [](const SamplePath& p, double lo, double hi, int grid, int refine, double eta, double cutoff) {
        ScanOptions o;
        o.sigma_lo = lo;
        o.sigma_hi = hi;
        o.initial_grid = grid;
        o.max_refinement = refine;
        o.eta_budget = eta;
        o.cutoff = cutoff;
        SignScanReport r;
        {
          py::gil_scoped_release release;
          r = scan(p, o);
        }
        return scan_dict(r);
      },
      py::arg("path"), py::arg("sigma_lo"), py::arg("sigma_hi"), py::arg("initial_grid") = 33,
      py::arg("max_refinement") = 4, py::arg("eta_budget") = 0.01, py::arg("cutoff") = 1e5);
  m.def(
      "certify_no_zeros",
      [](const SamplePath& p, double lo, double eta, double cutoff) {
        NoZeroOptions o;
        o.scan.eta_budget = eta;
        o.scan.cutoff = cutoff;
        return scan_dict(certify_no_zeros(p, lo, o));
      },
      py::arg("path"), py::arg("sigma_lo"), py::arg("eta") = 1e-3, py::arg("cutoff") = 1e5);

  m.def("hoeffding_bound", [](std::vector<double> a, double lambda) {
    return hoeffding_bound(WeightedRademacherInstance(std::move(a)), lambda);
  });
  m.def(
      "exact_tail",
      [](std::vector<double> a, double lambda, const std::string& mode) {
        if (mode != "sum" && mode != "max_prefix_abs") throw ValidationError("mode must be 'sum' or 'max_prefix_abs'");
        const auto d = exact_tail(WeightedRademacherInstance(std::move(a)), lambda,
                                  mode == "sum" ? TailMode::Sum : TailMode::MaxPrefixAbs);
        return std::make_pair(d.numerator, d.log2_denominator);
      },
      py::arg("weights"), py::arg("lam"), py::arg("mode") = "sum");
  m.def(
      "wilson_interval",
      [](std::int64_t k, std::int64_t n, double conf) {
        const auto i = wilson_interval(k, n, conf);
        return std::make_pair(i.lower, i.upper);
      },
      py::arg("successes"), py::arg("trials"), py::arg("confidence") = 0.95);

  m.def("char_function", &char_function);
  m.def("ks_statistic", [](const std::vector<double>& v) { return ks_statistic(v); });
  m.def(
      "clt_sample",
      [](SeqPtr seq, std::uint64_t seed, std::uint64_t count, double sigma, double cutoff) {
        return clt_sample(std::move(seq), seed, 0, count, sigma, cutoff).values;
      },
      py::arg("seq"), py::arg("seed"), py::arg("count"), py::arg("sigma"), py::arg("cutoff"));
  m.def("variance_profile", [](const FrequencySequence& s, double sigma) {
    const auto p = variance_profile(s, sigma);
    py::dict d;
    d["sigma"] = p.sigma;
    d["y"] = p.y_rule;
    d["v_y"] = p.v_y;
    d["mean_value_bound"] = p.mean_value_bound;
    d["u_y"] = std::make_pair(p.u_y.lower, p.u_y.upper);
    return d;
  });

  m.def(
      "run_experiment",
      [](const std::string& subcommand, const std::map<std::string, std::string>& settings) {
        auto config = make_config(parse_subcommand(subcommand));
        for (const auto& [k, v] : settings) config.set(k, v);
        ExperimentReport r;
        {
          py::gil_scoped_release release;
          r = run_experiment(config);
        }
        return r.document().dump();
      },
      py::arg("subcommand"), py::arg("settings") = std::map<std::string, std::string>{},
      "Runs a subcommand with key/value settings and returns the report document as JSON text.");
  m.attr("__version__") = code_version();
}
