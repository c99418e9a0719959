// Copyright 2026 The alee Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


// Command-line entry point: alee synth|run|ablate|sweep-m|serve.

#include "alee/config.hpp"
#include "alee/corpus.hpp"
#include "alee/harness.hpp"
#include "alee/service.hpp"

#include "CLI11.hpp"

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

namespace {

struct CommonFlags {
  std::string config;
  std::optional<std::string> strategy;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> m;
  std::optional<int> query_size;
  std::string out = "alee_out";
};

void add_common(CLI::App *cmd, CommonFlags &f) {
  cmd->add_option("--config", f.config, "JSON config file");
  cmd->add_option("--strategy", f.strategy,
                  "mblp, random, uncertainty, diversity, uncert_diver, loss_pred "
                  "(or an ablation variant: full, mblp_batch, lp_ie, lp_mean)");
  cmd->add_option("--seed", f.seed, "run a single seed instead of the configured list");
  cmd->add_option("--m", f.m, "top-m size, or \"inf\"");
  cmd->add_option("--query-size", f.query_size, "samples labeled per round");
  cmd->add_option("--out", f.out, "output directory");
}

alee::ExperimentConfig resolve(const CommonFlags &f) {
  alee::ExperimentConfig cfg = f.config.empty() ? alee::ExperimentConfig{} : alee::load_config(f.config);
  if (f.strategy) cfg.strategy = *f.strategy;
  if (f.seed) cfg.seeds = {*f.seed};
  if (f.m) cfg.m = alee::parse_m(nlohmann::json(*f.m));
  if (f.query_size) cfg.query_size = *f.query_size;
  alee::validate_config(cfg);
  alee::find_variant(cfg.strategy);
  return cfg;
}

void write_json(const std::filesystem::path &path, const nlohmann::json &j) {
  std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  out << j.dump(2) << "\n";
}

}  // namespace

int main(int argc, char **argv) {
  CLI::App app{"Active learning for event extraction with memory-based loss prediction"};
  app.require_subcommand(1);

  CommonFlags synth_f, run_f, ablate_f, sweep_f, serve_f;
  int port = 8080;

  auto *synth = app.add_subcommand("synth", "write a synthetic corpus and its schema");
  add_common(synth, synth_f);
  auto *run = app.add_subcommand("run", "run the active-learning loop for one strategy");
  add_common(run, run_f);
  auto *ablate = app.add_subcommand("ablate", "F1 table of the ablation variants");
  add_common(ablate, ablate_f);
  auto *sweep = app.add_subcommand("sweep-m", "labels needed to reach the target per m");
  add_common(sweep, sweep_f);
  auto *serve = app.add_subcommand("serve", "annotation service over HTTP");
  add_common(serve, serve_f);
  serve->add_option("--port", port, "listen port");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*synth) {
      const auto cfg = resolve(synth_f);
      const auto data = alee::prepare_data(cfg);
      std::filesystem::create_directories(synth_f.out);
      const std::filesystem::path base(synth_f.out);
      alee::save_corpus((base / "corpus.jsonl").string(), data.corpus);
      alee::save_schema(data.schema, (base / "schema.json").string());
      std::cout << "wrote " << data.corpus.size() << " sentences to " << (base / "corpus.jsonl")
                << "\n";
    } else if (*run) {
      const auto cfg = resolve(run_f);
      const auto data = alee::prepare_data(cfg);
      const auto curve = alee::run_experiment(data, cfg);
      alee::write_artifacts(run_f.out, cfg, curve);
      for (const auto &a : curve.aggregate) {
        std::cout << "round " << a.round << " labeled " << a.labeled << " trigger_f1 "
                  << a.trigger_mean << " +- " << a.trigger_std << " argument_f1 "
                  << a.argument_mean << " +- " << a.argument_std << "\n";
      }
    } else if (*ablate) {
      const auto cfg = resolve(ablate_f);
      const auto data = alee::prepare_data(cfg);
      const auto report = alee::ablation_suite(data, cfg);
      const std::filesystem::path base(ablate_f.out);
      write_json(base / "ablation.json", alee::to_json(report));
      for (const auto &c : report.curves) alee::write_artifacts((base / c.strategy).string(), cfg, c);
      std::cout << "variant";
      for (double f : report.fractions) std::cout << "\t" << 100.0 * f << "%";
      std::cout << "\n";
      for (std::size_t v = 0; v < report.variants.size(); ++v) {
        std::cout << report.variants[v];
        for (std::size_t f = 0; f < report.fractions.size(); ++f) {
          std::cout << "\t" << report.trigger_f1[v][f] << "/" << report.argument_f1[v][f];
        }
        std::cout << "\n";
      }
    } else if (*sweep) {
      const auto cfg = resolve(sweep_f);
      const auto data = alee::prepare_data(cfg);
      const auto report = alee::sweep_m(data, cfg);
      const std::filesystem::path base(sweep_f.out);
      write_json(base / "sweep_m.json", alee::to_json(report));
      for (const auto &c : report.curves) {
        alee::write_artifacts((base / ("m_" + alee::m_to_string(c.m))).string(), cfg, c);
      }
      std::cout << "full-data trigger F1 " << report.full_data_trigger_f1 << ", target "
                << report.target << "\n";
      for (const auto &e : report.entries) {
        std::cout << "m=" << alee::m_to_string(e.m) << "\t";
        if (e.fraction_of_pool) {
          std::cout << 100.0 * *e.fraction_of_pool << "%\n";
        } else {
          std::cout << ">100%\n";
        }
      }
    } else if (*serve) {
      const auto cfg = resolve(serve_f);
      alee::AnnotationService service(cfg);
      std::cout << "listening on port " << port << "\n";
      alee::serve_http(service, "0.0.0.0", port);
    }
  } catch (const std::exception &e) {
    std::cerr << "alee: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
