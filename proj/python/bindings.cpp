#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "mlrules/dataset.hpp"
#include "mlrules/error.hpp"
#include "mlrules/evaluation.hpp"
#include "mlrules/experiment.hpp"
#include "mlrules/heuristics.hpp"
#include "mlrules/rule.hpp"
#include "mlrules/theory.hpp"
#include "mlrules/threshold.hpp"

namespace py = pybind11;
using namespace mlrules;

namespace {

std::vector<std::vector<int>> to_rows(const LabelMatrix& m) {
  std::vector<std::vector<int>> out(m.rows(), std::vector<int>(m.cols()));
  for (std::size_t j = 0; j < m.rows(); ++j) {
    for (std::size_t i = 0; i < m.cols(); ++i) out[j][i] = m.at(j, i);
  }
  return out;
}

LabelMatrix from_rows(const std::vector<std::vector<int>>& rows) {
  LabelMatrix m(0, rows.empty() ? 0 : rows.front().size());
  for (const auto& r : rows) {
    if (r.size() != m.cols()) throw DataError("ragged label matrix");
    std::vector<std::uint8_t> bits(r.begin(), r.end());
    m.append_row(bits);
  }
  return m;
}

py::dict metrics_dict(const Metrics& m) {
  py::dict d;
  d["precision"] = m.precision;
  d["recall"] = m.recall;
  d["f1"] = m.f1;
  d["hamming"] = m.hamming;
  d["subset"] = m.subset;
  d["rules"] = m.rules;
  d["avg_conditions"] = m.avg_conditions;
  return d;
}

}  // namespace

PYBIND11_MODULE(_mlrules, m) {
  m.doc() = "Multi-label rule learning from randomized tree ensembles";

  auto base = py::register_exception<Error>(m, "Error");
  py::register_exception<ParseError>(m, "ParseError", base.ptr());
  py::register_exception<DataError>(m, "DataError", base.ptr());
  py::register_exception<ConfigError>(m, "ConfigError", base.ptr());

  py::class_<MultiLabelDataset>(m, "Dataset")
      .def_property_readonly("num_instances", &MultiLabelDataset::num_instances)
      .def_property_readonly("num_attributes", &MultiLabelDataset::num_attributes)
      .def_property_readonly("num_labels", &MultiLabelDataset::num_labels)
      .def_readonly("label_names", &MultiLabelDataset::label_names)
      .def_readonly("minority", &MultiLabelDataset::minority)
      .def_readonly("inverted", &MultiLabelDataset::inverted)
      .def_property_readonly("attribute_names",
                             [](const MultiLabelDataset& d) {
                               std::vector<std::string> names;
                               for (const auto& a : d.attributes) names.push_back(a.name);
                               return names;
                             })
      .def_property_readonly("labels", [](const MultiLabelDataset& d) { return to_rows(d.labels); })
      .def("subset", [](const MultiLabelDataset& d, const std::vector<std::size_t>& rows) { return d.subset(rows); })
      .def("hash", [](const MultiLabelDataset& d) { return dataset_hash(d); })
      .def("to_arff", [](const MultiLabelDataset& d) { return write_arff(d); })
      .def("to_json", [](const MultiLabelDataset& d) { return dataset_to_json(d); })
      .def("__eq__", [](const MultiLabelDataset& a, const MultiLabelDataset& b) { return a == b; });

  m.def(
      "parse_arff",
      [](const std::string& text, const std::vector<std::string>& labels) { return parse_arff(std::string_view(text), labels); },
      py::arg("text"), py::arg("label_names"));
  m.def("parse_label_header", [](const std::string& text) { return parse_label_header(std::string_view(text)); });
  m.def("load_dataset", &load_dataset, py::arg("arff_path"), py::arg("labels_xml_path"));
  m.def("preprocess", &preprocess, "Impute missing values, then invert labels whose minority class is 0");

  py::class_<ConfusionMatrix>(m, "ConfusionMatrix")
      .def(py::init([](double tp, double fp, double fn, double tn) { return ConfusionMatrix{tp, fp, fn, tn}; }),
           py::arg("tp") = 0, py::arg("fp") = 0, py::arg("fn") = 0, py::arg("tn") = 0)
      .def_readwrite("tp", &ConfusionMatrix::tp)
      .def_readwrite("fp", &ConfusionMatrix::fp)
      .def_readwrite("fn", &ConfusionMatrix::fn)
      .def_readwrite("tn", &ConfusionMatrix::tn)
      .def("__add__", [](const ConfusionMatrix& a, const ConfusionMatrix& b) { return a + b; })
      .def("__eq__", [](const ConfusionMatrix& a, const ConfusionMatrix& b) { return a == b; })
      .def("__repr__", [](const ConfusionMatrix& c) {
        return "ConfusionMatrix(tp=" + format_number(c.tp) + ", fp=" + format_number(c.fp) +
               ", fn=" + format_number(c.fn) + ", tn=" + format_number(c.tn) + ")";
      });
  m.def("atomic_confusion", &atomic_confusion, py::arg("truth"), py::arg("predicted"), py::arg("minority"));

  py::class_<HeuristicSpec>(m, "HeuristicSpec")
      .def_static("parse", [](const std::string& s) { return HeuristicSpec::parse(s); })
      .def("__str__", &HeuristicSpec::to_string)
      .def("__eq__", [](const HeuristicSpec& a, const HeuristicSpec& b) { return a == b; });
  m.def(
      "evaluate",
      [](const std::string& spec, const ConfusionMatrix& c) { return evaluate(HeuristicSpec::parse(spec), c); },
      py::arg("spec"), py::arg("confusion"));

  py::class_<RulePool>(m, "RulePool")
      .def_property_readonly("size", &RulePool::size)
      .def_property_readonly("label_count", &RulePool::label_count)
      .def_readonly("warnings", &RulePool::warnings)
      .def_readonly("sweeps", &RulePool::sweeps)
      .def("rule_count", [](const RulePool& p, std::size_t label) { return p.rules(label).size(); })
      .def("hash", &RulePool::hash)
      .def("to_text", &pool_to_text)
      .def("to_json", &pool_to_json);
  m.def(
      "generate_candidates",
      [](const MultiLabelDataset& ds, std::size_t gamma, std::uint64_t seed, std::size_t jobs) {
        GenerationConfig cfg;
        cfg.gamma = gamma;
        cfg.seed = seed;
        cfg.jobs = jobs;
        py::gil_scoped_release release;
        return generate_candidates(ds, cfg);
      },
      py::arg("dataset"), py::arg("gamma") = 10000, py::arg("seed") = 0, py::arg("jobs") = 1);

  py::class_<Theory>(m, "Theory")
      .def_property_readonly("rule_count", [](const Theory& t) { return stats(t).rules; })
      .def_property_readonly("mean_conditions", [](const Theory& t) { return stats(t).mean_conditions; })
      .def_readonly("threshold", &Theory::threshold)
      .def_readonly("warnings", &Theory::warnings)
      .def("predict", [](const Theory& t, const MultiLabelDataset& ds) { return to_rows(predict_batch(t, ds.instances)); })
      .def("listing", &theory_to_listing)
      .def("to_json", &theory_to_json)
      .def_static("from_json", [](const std::string& s) { return theory_from_json(s); });
  m.def(
      "build_theory",
      [](const RulePool& pool, const MultiLabelDataset& ds, const std::string& heuristic, double retention) {
        TrainConfig cfg;
        cfg.spec = HeuristicSpec::parse(heuristic);
        cfg.retention = retention;
        py::gil_scoped_release release;
        return build_theory(pool, ds, cfg);
      },
      py::arg("pool"), py::arg("dataset"), py::arg("heuristic") = "m:16", py::arg("retention") = 1.0);

  m.def("threshold_for_retention",
        [](const std::vector<double>& scores, double retention) { return threshold_for_retention(scores, retention); });

  m.def(
      "metrics",
      [](const std::vector<std::vector<int>>& truth, const std::vector<std::vector<int>>& predicted,
         const std::vector<std::uint8_t>& minority) {
        return metrics_dict(compute_metrics(from_rows(truth), from_rows(predicted), minority));
      },
      py::arg("truth"), py::arg("predicted"), py::arg("minority"));

  m.def(
      "kfold_split",
      [](std::size_t n, std::size_t k, std::uint64_t seed) {
        std::vector<std::pair<std::vector<std::size_t>, std::vector<std::size_t>>> out;
        for (auto& f : kfold_split(n, k, seed)) out.emplace_back(std::move(f.train), std::move(f.test));
        return out;
      },
      py::arg("n"), py::arg("k"), py::arg("seed"));

  m.def(
      "run_sweep",
      [](const MultiLabelDataset& ds, std::vector<double> m_values, std::vector<double> retentions, std::size_t gamma,
         std::size_t folds, std::uint64_t seed, std::size_t jobs, const std::string& name) {
        ExperimentConfig cfg;
        if (!m_values.empty()) cfg.grid.m_values = std::move(m_values);
        if (!retentions.empty()) cfg.grid.retentions = std::move(retentions);
        cfg.generation.gamma = gamma;
        cfg.folds = folds;
        cfg.seed = seed;
        cfg.jobs = jobs;
        cfg.dataset_name = name;
        SweepResult result;
        {
          py::gil_scoped_release release;
          result = run_sweep(ds, cfg);
        }
        return metrics_to_csv(result.all_rows());
      },
      py::arg("dataset"), py::arg("m_values") = std::vector<double>{}, py::arg("retentions") = std::vector<double>{},
      py::arg("gamma") = 10000, py::arg("folds") = 10, py::arg("seed") = 0, py::arg("jobs") = 1,
      py::arg("name") = "dataset",
      "Cross-validated grid sweep; returns the metrics CSV text");
}
