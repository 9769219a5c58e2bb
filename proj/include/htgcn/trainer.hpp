#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <random>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "htgcn/autodiff.hpp"
#include "htgcn/hetero_graph.hpp"
#include "htgcn/metapath.hpp"
#include "htgcn/metrics.hpp"
#include "htgcn/model.hpp"

namespace htgcn {

inline constexpr const char* kDefaultMetaPaths = "0-0-1-0-0,0-1-2-1-0";

struct RunConfig {
  int window_length = 3;
  std::size_t hidden = 16;
  std::size_t attention = 8;
  std::vector<MetaPath> metapaths = MetaPath::parse_list(kDefaultMetaPaths);
  double learning_rate = 1e-3;
  int epochs = 200;
  double label_rate = 0.8;
  std::uint64_t seed = 1;
  TypeTag target_type = 0;
  bool rescac = true;
  bool attention_rescale = false;
  bool keep_self_pairs = false;
  std::size_t pair_cap = 32;
  int plateau_epochs = 30;
  double plateau_tolerance = 1e-6;

  // Throws ConfigError naming the offending field.
  void validate() const;
  nlohmann::ordered_json to_json() const;
  static RunConfig from_json(const nlohmann::json& j);
};

// Independent deterministic generator for one purpose (pairing, init, masks)
// derived from the run seed.
enum class RngStream : std::uint32_t { pairing = 1, init = 2, masks = 3 };
std::mt19937_64 make_rng(std::uint64_t seed, RngStream stream);

// Partition of the labeled rows of the final snapshot's target type.
struct LabelMasks {
  std::vector<std::size_t> train;
  std::vector<std::size_t> heldout;
};

LabelMasks split_labels(std::span<const int> labels, double label_rate, std::uint64_t seed);

enum class MaskKind { heldout, train, all };
MaskKind parse_mask_kind(const std::string& text);

struct EpochLog {
  int epoch = 0;
  double loss = 0.0;
  MetricReport heldout;

  nlohmann::ordered_json to_json() const;
};

struct Checkpoint {
  static constexpr int kFormatVersion = 1;

  RunConfig config;
  int classes = 0;
  int epoch = 0;  // completed optimizer steps
  ModelParams params;
  MetricReport metrics;  // held-out metrics of these parameters

  nlohmann::ordered_json to_json() const;
  static Checkpoint from_json(const nlohmann::json& j);
  void save(const std::filesystem::path& path) const;
  static Checkpoint load(const std::filesystem::path& path);
};

struct TrainResult {
  Checkpoint checkpoint;
  std::vector<EpochLog> log;
};

// Full-batch training on the final snapshot of the last window_length snapshots.
// If `progress` is set, one line per epoch is written there.
TrainResult train(const RunConfig& cfg, const TemporalSeries& series,
                  std::ostream* progress = nullptr);

struct Prediction {
  DenseMatrix embedding;          // N x d rows of the final target-type nodes
  std::vector<int> predicted;     // argmax per row
  std::vector<int> truth;         // -1 where unlabeled
  std::vector<NodeId> node_ids;
};

Prediction predict(Checkpoint& checkpoint, const TemporalSeries& series);

MetricReport evaluate(Checkpoint& checkpoint, const TemporalSeries& series, MaskKind mask);

// Tab-separated: node_id, true_label, predicted_label, emb_0 .. emb_{d-1}.
void export_embeddings(Checkpoint& checkpoint, const TemporalSeries& series,
                       const std::filesystem::path& path);
void export_embeddings(const Prediction& prediction, std::ostream& out);

// Seeded toy instance used by the `gradcheck` command: window of 3 snapshots
// with at most 12 labeled nodes each, d = 3, two meta-paths.
struct GradCheckInstance {
  TemporalSeries series;
  RunConfig config;
};
GradCheckInstance gradcheck_instance(std::uint64_t seed);
// Step used on the toy window. Smaller steps lose digits to cancellation on
// the smallest gradient entries.
inline constexpr double kGradcheckStep = 1e-4;
ad::GradCheckReport run_gradcheck(std::uint64_t seed, double h = kGradcheckStep);

}  // namespace htgcn
