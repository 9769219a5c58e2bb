// htgcn command-line front end: generate, train, evaluate, export, gradcheck.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "htgcn/datagen.hpp"
#include "htgcn/errors.hpp"
#include "htgcn/series_io.hpp"
#include "htgcn/trainer.hpp"

namespace fs = std::filesystem;

namespace {

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw htgcn::IoError("cannot open " + path.string() + " for writing");
  out << text;
  if (!out) throw htgcn::IoError("failed writing " + path.string());
}

void report_error(const char* kind, const std::string& message) {
  nlohmann::ordered_json j;
  j["error"] = kind;
  j["message"] = message;
  std::cerr << j.dump() << '\n';
}

// Run-configuration files are flat key=value lists of train flags. CLI11 only
// reads config files at the top level, so bare keys are routed to `train`.
class TrainConfigFile : public CLI::ConfigBase {
 public:
  std::vector<CLI::ConfigItem> from_config(std::istream& input) const override {
    auto items = CLI::ConfigBase::from_config(input);
    for (auto& item : items)
      if (item.parents.empty()) item.parents.push_back("train");
    return items;
  }
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Heterogeneous temporal GCN community detection"};
  app.require_subcommand(1);

  // generate
  htgcn::GenConfig gen;
  std::string gen_out;
  auto* generate = app.add_subcommand("generate", "Write a synthetic temporal het-SBM series");
  generate->add_option("--seed", gen.seed, "Generator seed");
  generate->add_option("--out", gen_out, "Output series file (JSON lines)")->required();
  generate->add_option("--steps", gen.time_steps, "Number of snapshots");
  generate->add_option("--communities", gen.community_count, "Community count C");
  generate->add_option("--node-types", gen.node_type_count, "Node type count");
  generate->add_option("--edge-types", gen.edge_type_count, "Edge type count");
  generate->add_option("--nodes", gen.nodes_per_type, "Nodes per type")->delimiter(',');
  generate->add_option("--p-in", gen.p_in, "Within-community edge probability");
  generate->add_option("--p-out", gen.p_out, "Cross-community edge probability");
  generate->add_option("--churn", gen.churn_rate, "Fraction of nodes replaced per step");
  generate->add_option("--migration", gen.migration_rate,
                       "Fraction of survivors changing community per step");
  generate->add_option("--features", gen.feature_dim, "Feature dimension D");
  generate->add_option("--noise", gen.feature_noise, "Feature noise scale");
  generate->add_option("--labeled-type", gen.labeled_type, "Node type carrying labels");

  // train
  htgcn::RunConfig run;
  std::string train_in, train_out, metapaths = htgcn::kDefaultMetaPaths;
  bool no_rescac = false;
  bool quiet = false;
  auto* train = app.add_subcommand("train", "Train on a series and write a checkpoint");
  app.set_config("--config", "", "Flat key=value run configuration; flags take precedence");
  app.config_formatter(std::make_shared<TrainConfigFile>());
  app.allow_config_extras(CLI::config_extras_mode::error);
  train->fallthrough();
  train->add_option("--in", train_in, "Input series file")->required();
  train->add_option("--out", train_out, "Output directory")->required();
  train->add_option("--seed", run.seed, "Run seed");
  train->add_option("--window", run.window_length, "Window length")
      ->check(CLI::IsMember({3, 5, 7}));
  train->add_option("--lr", run.learning_rate, "Adam learning rate");
  train->add_option("--epochs", run.epochs, "Epoch budget");
  train->add_option("--label-rate", run.label_rate, "Fraction of labeled nodes used for training");
  train->add_option("--meta-paths", metapaths, "Comma-separated meta-paths, e.g. 0-0-1-0-0");
  train->add_option("--hidden", run.hidden, "Hidden width of the first GCN layer");
  train->add_option("--attention-dim", run.attention, "Attention width d_a");
  train->add_option("--pair-cap", run.pair_cap, "Maximum cross-time pairs per anchor");
  train->add_option("--target-type", run.target_type, "Node type to detect communities on");
  train->add_flag("--keep-self-pairs", run.keep_self_pairs, "Keep pairs whose endpoints coincide");
  train->add_flag("--attention-rescale", run.attention_rescale,
                  "Multiply attention weights by the node count");
  train->add_flag("--no-rescac", no_rescac, "HGCN-only ablation");
  train->add_flag("--quiet", quiet, "Do not print per-epoch progress");

  // evaluate
  std::string eval_ck, eval_in, eval_out, eval_mask = "heldout";
  auto* evaluate = app.add_subcommand("evaluate", "Score a checkpoint on a series");
  evaluate->add_option("--checkpoint", eval_ck, "Checkpoint file")->required();
  evaluate->add_option("--in", eval_in, "Input series file")->required();
  evaluate->add_option("--mask", eval_mask, "heldout, train or all")
      ->check(CLI::IsMember({"heldout", "train", "all"}));
  evaluate->add_option("--out", eval_out, "Also write the metrics JSON here");

  // export
  std::string exp_ck, exp_in, exp_out;
  auto* exporter = app.add_subcommand("export", "Write final-step embeddings as TSV");
  exporter->add_option("--checkpoint", exp_ck, "Checkpoint file")->required();
  exporter->add_option("--in", exp_in, "Input series file")->required();
  exporter->add_option("--out", exp_out, "Output TSV")->required();

  // gradcheck
  std::uint64_t gc_seed = 1;
  double gc_step = htgcn::kGradcheckStep;
  double gc_tolerance = 1e-5;
  auto* gradcheck = app.add_subcommand("gradcheck", "Finite-difference check on a toy window");
  gradcheck->add_option("--seed", gc_seed, "Seed of the toy instance");
  gradcheck->add_option("--step", gc_step, "Central-difference step");
  gradcheck->add_option("--tolerance", gc_tolerance, "Maximum accepted relative error");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << e.what() << "\n\n" << app.help();
    return 2;
  }

  try {
    if (*generate) {
      htgcn::write_series(htgcn::generate_series(gen), fs::path(gen_out));
    } else if (*train) {
      run.metapaths = htgcn::MetaPath::parse_list(metapaths);
      run.rescac = !no_rescac;
      const auto series = htgcn::read_series(fs::path(train_in));
      fs::create_directories(train_out);
      std::ofstream log(fs::path(train_out) / "train_log.jsonl", std::ios::binary | std::ios::trunc);
      if (!log) throw htgcn::IoError("cannot write the training log in " + train_out);
      const auto result = htgcn::train(run, series, &log);
      if (!quiet) {
        for (const auto& e : result.log) {
          std::cerr << "epoch " << e.epoch << " loss " << e.loss << " ACC "
                    << htgcn::round_percent(e.heldout.acc) << '\n';
        }
      }
      result.checkpoint.save(fs::path(train_out) / "checkpoint.json");
      const std::string metrics = result.checkpoint.metrics.to_json().dump(2) + "\n";
      write_text(fs::path(train_out) / "metrics.json", metrics);
      std::cout << metrics;
    } else if (*evaluate) {
      auto ck = htgcn::Checkpoint::load(eval_ck);
      const auto series = htgcn::read_series(fs::path(eval_in));
      const auto report = htgcn::evaluate(ck, series, htgcn::parse_mask_kind(eval_mask));
      const std::string metrics = report.to_json().dump(2) + "\n";
      if (!eval_out.empty()) write_text(eval_out, metrics);
      std::cout << metrics;
    } else if (*exporter) {
      auto ck = htgcn::Checkpoint::load(exp_ck);
      htgcn::export_embeddings(ck, htgcn::read_series(fs::path(exp_in)), exp_out);
    } else if (*gradcheck) {
      const auto r = htgcn::run_gradcheck(gc_seed, gc_step);
      nlohmann::ordered_json j;
      j["max_relative_error"] = r.max_relative_error;
      j["entries_checked"] = r.entries_checked;
      j["worst_parameter"] = r.worst_parameter;
      j["worst_index"] = r.worst_index;
      j["pass"] = r.max_relative_error < gc_tolerance;
      std::cout << j.dump() << '\n';
      return r.max_relative_error < gc_tolerance ? 0 : 1;
    }
  } catch (const htgcn::Error& e) {
    report_error(e.kind(), e.what());
    return 1;
  } catch (const std::exception& e) {
    report_error("internal", e.what());
    return 1;
  }
  return 0;
}
