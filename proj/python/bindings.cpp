#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "nala/config.hpp"
#include "nala/inference.hpp"
#include "nala/matcher.hpp"
#include "nala/pipeline.hpp"
#include "nala/truth.hpp"

namespace py = pybind11;

namespace {

// KG2 ids are shifted so the two sides never collide inside the matcher.
constexpr std::uint32_t kRightOffset = 1u << 31;

py::dict report_dict(const nala::EvaluationReport& r) {
  py::dict d;
  d["hits_at_1"] = r.hits_at_1;
  d["precision"] = r.precision;
  d["recall"] = r.recall;
  d["f1"] = r.f1;
  d["matched"] = r.matched;
  d["correct"] = r.correct;
  d["truth"] = r.truth;
  d["iterations"] = r.iterations;
  d["runtime_seconds"] = r.runtime_seconds;
  return d;
}

nala::RunConfig make_config(const py::dict& options) {
  nala::RunConfig config;
  for (const auto& [key, value] : options) {
    config.set(py::str(key).cast<std::string>(), py::str(value).cast<std::string>());
  }
  config.validate();
  return config;
}

}  // namespace

PYBIND11_MODULE(_nala, m) {
  m.doc() = "Entity alignment by non-axiomatic similarity inference";

  py::register_exception<nala::DomainError>(m, "DomainError", PyExc_ValueError);
  py::register_exception<nala::ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<nala::LoadError>(m, "LoadError", PyExc_IOError);

  py::class_<nala::TruthValue>(m, "TruthValue")
      .def(py::init<double, double>(), py::arg("f"), py::arg("c"))
      .def_readwrite("f", &nala::TruthValue::f)
      .def_readwrite("c", &nala::TruthValue::c)
      .def_property_readonly("expectation", &nala::TruthValue::expectation)
      .def("__eq__", [](const nala::TruthValue& a, const nala::TruthValue& b) { return a == b; })
      .def("__repr__", [](const nala::TruthValue& tv) { return nala::to_string(tv); });

  m.def("deduction", &nala::deduction);
  m.def("analogy", &nala::analogy);
  m.def("conditional_deduction", &nala::conditional_deduction);
  m.def("induction", &nala::induction);
  m.def("revision", &nala::revision);
  m.def("probabilistic_revision", &nala::probabilistic_revision);
  m.def("scale_evidence", &nala::scale_evidence, py::arg("tv"), py::arg("factor"));
  m.def("type1_truth", &nala::type1_truth, py::arg("rel_inheritance"), py::arg("pair_similarity"),
        py::arg("functionality"));
  m.def("type3_truth", &nala::type3_truth, py::arg("source_similarity"),
        py::arg("target_similarity"), py::arg("present"), py::arg("c_absent"));

  m.def("config_keys", &nala::RunConfig::keys);

  m.def(
      "match",
      [](const std::vector<std::tuple<std::uint32_t, std::uint32_t, double, double>>& sentences,
         std::size_t k_sim, bool swap) {
        std::map<std::uint32_t, nala::CandidateList> lists;
        for (const auto& [left, right, f, c] : sentences) {
          if (left >= kRightOffset || right >= kRightOffset) throw py::value_error("id too large");
          auto it = lists.try_emplace(left, nala::TermId{left}, k_sim).first;
          it->second.insert_topk({nala::TermId{left}, nala::TermId{right + kRightOffset}, {f, c}});
        }
        std::vector<nala::CandidateList> flat;
        for (auto& [id, list] : lists) flat.push_back(std::move(list));
        nala::MatchResult result = nala::rbmat(flat);
        if (swap) result = nala::swap_refine(std::move(result), flat);
        std::vector<std::tuple<std::uint32_t, std::uint32_t, double, double>> out;
        for (const auto& p : result.pairs) {
          out.emplace_back(p.e1.value, p.e2.value - kRightOffset, p.tv.f, p.tv.c);
        }
        return out;
      },
      py::arg("sentences"), py::arg("k_sim"), py::arg("swap") = true,
      "1-to-1 matching of (left, right, f, c) sentences; returns matched tuples");

  m.def(
      "align",
      [](const py::dict& options) {
        const nala::RunConfig config = make_config(options);
        nala::EvaluationReport report;
        std::vector<std::tuple<std::string, std::string, double, double>> pairs;
        {
          py::gil_scoped_release release;
          const nala::Dataset data = nala::load_dataset(config);
          nala::Aligner aligner(config, data);
          report = aligner.run();
          for (const auto& p : aligner.alignment()) {
            pairs.emplace_back(data.kgs->terms.name(p.e1), data.kgs->terms.name(p.e2), p.tv.f,
                               p.tv.c);
          }
        }
        py::dict out = report_dict(report);
        out["alignment"] = pairs;
        return out;
      },
      py::arg("options"),
      "Runs the iterative aligner; options maps config keys to values");

  m.def(
      "evaluate",
      [](const std::vector<std::pair<std::string, std::string>>& pred,
         const std::vector<std::pair<std::string, std::string>>& truth) {
        return report_dict(nala::evaluate(pred, truth));
      },
      py::arg("pred"), py::arg("truth"));
}
