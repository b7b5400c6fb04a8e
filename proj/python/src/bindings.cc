/*
 * Copyright 2026 The fedval-sim Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *      http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

// Python bindings for the simulator core.

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <string>
#include <vector>

#include "fedval/aggregators.h"
#include "fedval/cli.h"
#include "fedval/common.h"
#include "fedval/config.h"
#include "fedval/data.h"
#include "fedval/model.h"
#include "fedval/orchestrator.h"
#include "fedval/privacy.h"
#include "fedval/scoring.h"
#include "json.hpp"

namespace py = pybind11;

namespace {

fedval::MlpSpec MakeSpec(const std::vector<int>& layer_sizes,
                         const std::string& activation, uint64_t seed) {
  fedval::MlpSpec spec{layer_sizes, fedval::ParseActivation(activation), seed};
  spec.Validate();
  return spec;
}

std::vector<fedval::ClientUpdate> MakeUpdates(
    const std::vector<std::vector<double>>& deltas) {
  std::vector<fedval::ClientUpdate> out;
  for (std::size_t i = 0; i < deltas.size(); ++i)
    out.push_back({static_cast<int>(i), deltas[i], 1});
  return out;
}

py::dict MetricToDict(const fedval::MetricRecord& r) {
  py::dict d;
  d["round"] = r.round;
  d["overall_accuracy"] = r.overall_accuracy;
  d["per_label_accuracy"] = r.per_label_accuracy;
  d["label_accuracy_mad"] = r.label_accuracy_mad;
  d["per_group_recall"] = r.per_group_recall;
  if (r.backdoor_accuracy)
    d["backdoor_accuracy"] = *r.backdoor_accuracy;
  else
    d["backdoor_accuracy"] = py::none();
  d["mean_validation_loss"] = r.mean_validation_loss;
  return d;
}

fedval::ExperimentConfig ParseConfig(const std::string& text) {
  fedval::ExperimentConfig c =
      fedval::ConfigFromJson(nlohmann::json::parse(text));
  c.Validate();
  return c;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Federated learning simulator with validation-score aggregation";
  m.attr("__version__") = fedval::kToolVersion;

  py::register_exception<fedval::ConfigError>(m, "ConfigError",
                                              PyExc_ValueError);

  m.def(
      "gen_synthetic",
      [](int classes, std::size_t dim, std::size_t samples, double separation,
         uint64_t seed) {
        const fedval::Dataset d =
            fedval::GenSynthetic(classes, dim, samples, separation, seed);
        py::array_t<double> x({d.size(), d.dim});
        std::copy(d.features.begin(), d.features.end(), x.mutable_data());
        py::array_t<int> y(d.size());
        std::copy(d.labels.begin(), d.labels.end(), y.mutable_data());
        return py::make_tuple(x, y);
      },
      py::arg("classes"), py::arg("dim"), py::arg("samples"),
      py::arg("separation"), py::arg("seed"),
      "Gaussian class blobs; returns (features[n, d], labels[n]).");

  m.def(
      "init_params",
      [](const std::vector<int>& layer_sizes, const std::string& activation,
         uint64_t seed) {
        return fedval::InitParams(MakeSpec(layer_sizes, activation, seed));
      },
      py::arg("layer_sizes"), py::arg("activation") = "relu",
      py::arg("seed") = 0);

  m.def(
      "forward",
      [](const std::vector<double>& params, const std::vector<int>& layer_sizes,
         const std::vector<double>& x, const std::string& activation) {
        return fedval::Forward(params, MakeSpec(layer_sizes, activation, 0), x);
      },
      py::arg("params"), py::arg("layer_sizes"), py::arg("x"),
      py::arg("activation") = "relu", "Class probabilities for one input.");

  m.def(
      "mad", [](const std::vector<double>& v) { return fedval::Mad(v); },
      py::arg("values"), "Mean absolute deviation from the mean.");

  m.def(
      "score",
      [](const std::vector<std::vector<double>>& label_loss,
         const std::vector<double>& overall_loss, double s2, double s1_label,
         double s1_avg, double c) {
        if (label_loss.empty() || label_loss.size() != overall_loss.size())
          throw fedval::ConfigError("one overall loss per client is required");
        fedval::ValidationReport r;
        r.label_loss = label_loss;
        r.overall_loss = overall_loss;
        const std::size_t k = label_loss.front().size();
        for (std::size_t j = 0; j < k; ++j) {
          std::vector<double> col;
          for (const auto& row : label_loss) {
            if (row.size() != k)
              throw fedval::ConfigError("ragged label_loss table");
            col.push_back(row[j]);
          }
          double mean = 0.0;
          for (double v : col) mean += v / static_cast<double>(col.size());
          r.mean_label_loss.push_back(mean);
          r.mad_label_loss.push_back(fedval::Mad(col));
        }
        double mean = 0.0;
        for (double v : overall_loss)
          mean += v / static_cast<double>(overall_loss.size());
        r.mean_overall_loss = mean;
        r.mad_overall_loss = fedval::Mad(overall_loss);
        fedval::ScoreParams p;
        p.s2 = s2;
        p.s1_label = s1_label;
        p.s1_avg = s1_avg;
        p.c = c;
        p.Validate();
        const fedval::ScoreTable t =
            fedval::Score(r, p, fedval::ScoreDimensions{});
        py::dict out;
        out["raw"] = t.raw;
        out["weights"] = t.weights;
        out["zero_update"] = t.zero_update;
        return out;
      },
      py::arg("label_loss"), py::arg("overall_loss"), py::arg("s2") = 3.0,
      py::arg("s1_label") = 3.0, py::arg("s1_avg") = 5.0, py::arg("c") = 3.0,
      "Client scores and weights from per-label and overall losses.");

  m.def("s2_candidates", &fedval::S2Candidates, py::arg("current"));

  m.def(
      "multi_krum",
      [](const std::vector<std::vector<double>>& deltas, double remove) {
        const auto sel = fedval::MultiKrum(MakeUpdates(deltas), remove);
        return py::make_tuple(sel.selected, sel.scores);
      },
      py::arg("deltas"), py::arg("remove_fraction"),
      "Returns (selected indices, Krum scores).");

  m.def(
      "trimmed_mean",
      [](const std::vector<std::vector<double>>& deltas, double trim) {
        if (deltas.empty()) throw fedval::ConfigError("no updates");
        return fedval::TrimmedMean(
            std::vector<double>(deltas.front().size(), 0.0),
            MakeUpdates(deltas), trim);
      },
      py::arg("deltas"), py::arg("trim_fraction"));

  m.def(
      "clip",
      [](const std::vector<double>& delta, double bound) {
        const fedval::ClipResult r = fedval::Clip(delta, bound);
        return py::make_tuple(r.delta, r.clipped);
      },
      py::arg("delta"), py::arg("bound"));

  m.def(
      "malicious_round_probability",
      [](int n, double p, int k0, long long rounds) {
        const auto t = fedval::MaliciousRoundProbability(n, p, k0, rounds);
        return py::make_tuple(t.per_round, t.at_least_once);
      },
      py::arg("n"), py::arg("p"), py::arg("k0"), py::arg("rounds"),
      "Returns (per-round probability, at-least-once probability).");

  m.def("default_k0", &fedval::DefaultK0, py::arg("n"), py::arg("threshold"));

  m.def(
      "config_hash",
      [](const std::string& config_json) {
        return fedval::ConfigHash(ParseConfig(config_json));
      },
      py::arg("config_json"));

  m.def(
      "run_experiment",
      [](const std::string& config_json, int workers) {
        const fedval::ExperimentConfig config = ParseConfig(config_json);
        fedval::ExperimentResult result;
        {
          py::gil_scoped_release release;
          result = fedval::RunExperiment(config, workers);
        }
        py::list metrics;
        for (const auto& r : result.metrics) metrics.append(MetricToDict(r));
        py::list rounds;
        for (const auto& log : result.rounds)
          rounds.append(fedval::RoundLogToJson(log).dump());
        py::dict out;
        out["final_model"] = result.final_model;
        out["metrics"] = metrics;
        out["rounds"] = rounds;
        out["config_hash"] = fedval::ConfigHash(config);
        return out;
      },
      py::arg("config_json"), py::arg("workers") = 1,
      "Runs an experiment from a JSON config string. Round logs are JSON "
      "strings.");
}
