#include "htgcn/trainer.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <ostream>

#include "htgcn/datagen.hpp"
#include "htgcn/errors.hpp"
#include "htgcn/objective.hpp"

namespace htgcn {

namespace {

using nlohmann::json;
using nlohmann::ordered_json;

std::string metapaths_to_string(const std::vector<MetaPath>& mps) {
  std::string s;
  for (const MetaPath& mp : mps) {
    if (!s.empty()) s += ',';
    s += mp.to_string();
  }
  return s;
}

struct RunContext {
  PreparedWindow window;
  DenseMatrix final_adjacency;
  std::vector<int> labels;
  std::vector<NodeId> node_ids;
  LabelMasks masks;
  int classes = 0;
};

RunContext make_context(const RunConfig& cfg, const TemporalSeries& series) {
  if (series.size() < static_cast<std::size_t>(cfg.window_length)) {
    throw ConfigError("window", "window of " + std::to_string(cfg.window_length) +
                                    " snapshots but the series has " +
                                    std::to_string(series.size()));
  }
  const auto window = series.window(static_cast<std::size_t>(cfg.window_length));
  const HeteroSnapshot& last = window.back();

  RunContext ctx;
  PairingOptions pairing;
  pairing.max_pairs_per_anchor = cfg.pair_cap;
  pairing.keep_self_pairs = cfg.keep_self_pairs;
  auto pairing_rng = make_rng(cfg.seed, RngStream::pairing);
  ctx.window = prepare_window(window, cfg.target_type, cfg.metapaths, pairing, pairing_rng);
  ctx.final_adjacency = collapse_adjacency(last, cfg.target_type);
  ctx.labels = last.labels(cfg.target_type);
  for (std::size_t p : last.nodes_of_type(cfg.target_type)) ctx.node_ids.push_back(last.nodes()[p].id);

  const int max_label = *std::max_element(ctx.labels.begin(), ctx.labels.end());
  if (max_label < 0) {
    throw ConfigError("input", "final snapshot has no labeled nodes of type " +
                                   std::to_string(cfg.target_type));
  }
  ctx.classes = max_label + 1;
  ctx.masks = split_labels(ctx.labels, cfg.label_rate, cfg.seed);
  return ctx;
}

std::vector<int> argmax_rows(const DenseMatrix& z) {
  std::vector<int> out(z.rows());
  for (std::size_t i = 0; i < z.rows(); ++i) {
    const auto row = z.row(i);
    out[i] = static_cast<int>(std::max_element(row.begin(), row.end()) - row.begin());
  }
  return out;
}

MetricReport score(const RunContext& ctx, const std::vector<int>& predicted,
                   std::span<const std::size_t> rows) {
  std::vector<int> pred, truth;
  for (std::size_t r : rows) {
    pred.push_back(predicted[r]);
    truth.push_back(ctx.labels[r]);
  }
  return evaluate_partition(pred, truth, modularity(ctx.final_adjacency, predicted));
}

std::span<const std::size_t> report_rows(const LabelMasks& m) {
  return m.heldout.empty() ? std::span<const std::size_t>(m.train) : m.heldout;
}

std::vector<int> masked_labels(const RunContext& ctx, std::span<const std::size_t> rows) {
  std::vector<int> out(ctx.labels.size(), -1);
  for (std::size_t r : rows) out[r] = ctx.labels[r];
  return out;
}

ModelOptions model_options(const RunConfig& cfg) {
  return ModelOptions{cfg.rescac, cfg.attention_rescale};
}

DenseMatrix forward_embedding(const RunContext& ctx, ModelParams& params, const RunConfig& cfg) {
  ad::Tape tape;
  return htgcn_forward(tape, ctx.window, params, model_options(cfg)).output.data();
}

void check_checkpoint(const Checkpoint& ck, const RunContext& ctx) {
  const ModelDims dims = ck.params.dims();
  if (dims.feature_dim != ctx.window.steps.back().features.cols() ||
      dims.embedding != static_cast<std::size_t>(ck.classes) || ctx.classes > ck.classes ||
      dims.metapath_count != ck.config.metapaths.size()) {
    throw ShapeError("checkpoint shapes (D=" + std::to_string(dims.feature_dim) + ", d=" +
                     std::to_string(dims.embedding) + ") do not match the input series (D=" +
                     std::to_string(ctx.window.steps.back().features.cols()) + ", C=" +
                     std::to_string(ctx.classes) + ")");
  }
}

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

}  // namespace

void RunConfig::validate() const {
  if (window_length != 3 && window_length != 5 && window_length != 7) {
    throw ConfigError("window", "must be 3, 5 or 7, got " + std::to_string(window_length));
  }
  if (hidden == 0) throw ConfigError("hidden", "must be positive");
  if (attention == 0) throw ConfigError("attention", "must be positive");
  if (metapaths.empty()) throw ConfigError("meta-paths", "at least one meta-path is required");
  if (!(learning_rate > 0.0)) throw ConfigError("lr", "must be positive");
  if (epochs < 0) throw ConfigError("epochs", "must be non-negative");
  if (!(label_rate > 0.0 && label_rate <= 1.0)) throw ConfigError("label-rate", "must lie in (0,1]");
  if (pair_cap == 0) throw ConfigError("pair-cap", "must be positive");
  if (plateau_epochs < 1) throw ConfigError("plateau-epochs", "must be positive");
}

ordered_json RunConfig::to_json() const {
  ordered_json j;
  j["window"] = window_length;
  j["hidden"] = hidden;
  j["attention"] = attention;
  j["meta_paths"] = metapaths_to_string(metapaths);
  j["lr"] = learning_rate;
  j["epochs"] = epochs;
  j["label_rate"] = label_rate;
  j["seed"] = seed;
  j["target_type"] = target_type;
  j["rescac"] = rescac;
  j["attention_rescale"] = attention_rescale;
  j["keep_self_pairs"] = keep_self_pairs;
  j["pair_cap"] = pair_cap;
  j["plateau_epochs"] = plateau_epochs;
  j["plateau_tolerance"] = plateau_tolerance;
  return j;
}

RunConfig RunConfig::from_json(const json& j) {
  RunConfig c;
  try {
    c.window_length = j.at("window").get<int>();
    c.hidden = j.at("hidden").get<std::size_t>();
    c.attention = j.at("attention").get<std::size_t>();
    c.metapaths = MetaPath::parse_list(j.at("meta_paths").get<std::string>());
    c.learning_rate = j.at("lr").get<double>();
    c.epochs = j.at("epochs").get<int>();
    c.label_rate = j.at("label_rate").get<double>();
    c.seed = j.at("seed").get<std::uint64_t>();
    c.target_type = j.at("target_type").get<int>();
    c.rescac = j.at("rescac").get<bool>();
    c.attention_rescale = j.at("attention_rescale").get<bool>();
    c.keep_self_pairs = j.at("keep_self_pairs").get<bool>();
    c.pair_cap = j.at("pair_cap").get<std::size_t>();
    c.plateau_epochs = j.at("plateau_epochs").get<int>();
    c.plateau_tolerance = j.at("plateau_tolerance").get<double>();
  } catch (const json::exception& e) {
    throw ConfigError("config", e.what());
  }
  return c;
}

std::mt19937_64 make_rng(std::uint64_t seed, RngStream stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream)};
  return std::mt19937_64(seq);
}

LabelMasks split_labels(std::span<const int> labels, double label_rate, std::uint64_t seed) {
  std::vector<std::size_t> labeled;
  for (std::size_t i = 0; i < labels.size(); ++i)
    if (labels[i] >= 0) labeled.push_back(i);
  auto rng = make_rng(seed, RngStream::masks);
  std::shuffle(labeled.begin(), labeled.end(), rng);
  const auto n = labeled.size();
  auto n_train = static_cast<std::size_t>(std::llround(label_rate * static_cast<double>(n)));
  n_train = std::clamp<std::size_t>(n_train, n == 0 ? 0 : 1, n);
  LabelMasks m;
  m.train.assign(labeled.begin(), labeled.begin() + static_cast<std::ptrdiff_t>(n_train));
  m.heldout.assign(labeled.begin() + static_cast<std::ptrdiff_t>(n_train), labeled.end());
  std::sort(m.train.begin(), m.train.end());
  std::sort(m.heldout.begin(), m.heldout.end());
  return m;
}

MaskKind parse_mask_kind(const std::string& text) {
  if (text == "heldout") return MaskKind::heldout;
  if (text == "train") return MaskKind::train;
  if (text == "all") return MaskKind::all;
  throw ConfigError("mask", "expected heldout, train or all, got '" + text + "'");
}

ordered_json EpochLog::to_json() const {
  ordered_json j;
  j["epoch"] = epoch;
  j["loss"] = loss;
  j["heldout"] = heldout.to_json();
  return j;
}

ordered_json Checkpoint::to_json() const {
  ordered_json j;
  j["format"] = "htgcn-checkpoint";
  j["version"] = kFormatVersion;
  j["config"] = config.to_json();
  j["classes"] = classes;
  j["epoch"] = epoch;
  j["metrics"] = metrics.to_json();
  ordered_json ps = ordered_json::array();
  for (const ad::Parameter* p : params.all()) {
    ordered_json e;
    e["name"] = p->name;
    e["rows"] = p->value.rows();
    e["cols"] = p->value.cols();
    e["data"] = std::vector<double>(p->value.values().begin(), p->value.values().end());
    ps.push_back(std::move(e));
  }
  j["params"] = std::move(ps);
  return j;
}

Checkpoint Checkpoint::from_json(const json& j) {
  try {
    if (j.at("format").get<std::string>() != "htgcn-checkpoint") {
      throw ConfigError("checkpoint", "not an htgcn checkpoint");
    }
    if (j.at("version").get<int>() != kFormatVersion) {
      throw ConfigError("checkpoint", "unsupported version " + j.at("version").dump());
    }
    Checkpoint ck;
    ck.config = RunConfig::from_json(j.at("config"));
    ck.classes = j.at("classes").get<int>();
    ck.epoch = j.at("epoch").get<int>();
    const json& m = j.at("metrics");
    ck.metrics.acc = m.at("ACC").get<double>() / 100.0;
    ck.metrics.nmi = m.at("NMI").get<double>() / 100.0;
    ck.metrics.modularity = m.at("Modularity").get<double>() / 100.0;
    ck.metrics.ari = m.at("ARI").get<double>() / 100.0;
    ck.metrics.macro_f1 = m.at("Macro-F1").get<double>() / 100.0;
    ck.metrics.micro_f1 = m.at("Micro-F1").get<double>() / 100.0;

    std::unordered_map<std::string, DenseMatrix> stored;
    for (const json& e : j.at("params")) {
      stored.emplace(e.at("name").get<std::string>(),
                     DenseMatrix(e.at("rows").get<std::size_t>(), e.at("cols").get<std::size_t>(),
                                 e.at("data").get<std::vector<double>>()));
    }
    const auto take = [&stored](const std::string& name) {
      const auto it = stored.find(name);
      if (it == stored.end()) throw ConfigError("checkpoint", "missing parameter " + name);
      return ad::Parameter(name, it->second);
    };
    ck.params.hgcn.w0 = take("hgcn.w0");
    ck.params.hgcn.w1 = take("hgcn.w1");
    for (std::size_t k = 0; k < ck.config.metapaths.size(); ++k)
      ck.params.rescac.compress.push_back(take("rescac.compress." + std::to_string(k)));
    ck.params.rescac.attn_v = take("rescac.attn_v");
    ck.params.rescac.attn_w = take("rescac.attn_w");

    const ModelDims d = ck.params.dims();
    bool ok = ck.params.hgcn.w1.value.rows() == d.hidden && d.embedding == static_cast<std::size_t>(ck.classes) &&
              ck.params.rescac.attn_v.value.cols() == d.embedding &&
              ck.params.rescac.attn_w.value.rows() == 1 &&
              ck.params.rescac.attn_w.value.cols() == d.attention;
    for (const auto& c : ck.params.rescac.compress)
      ok = ok && c.value.rows() == d.embedding * d.embedding && c.value.cols() == d.embedding;
    if (!ok) throw ShapeError("checkpoint parameter shapes are inconsistent");
    return ck;
  } catch (const json::exception& e) {
    throw ConfigError("checkpoint", e.what());
  }
}

void Checkpoint::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << to_json().dump() << '\n';
  if (!out) throw IoError("failed writing " + path.string());
}

Checkpoint Checkpoint::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ParseError(1, "checkpoint", e.what());
  }
  return from_json(j);
}

TrainResult train(const RunConfig& cfg, const TemporalSeries& series, std::ostream* progress) {
  cfg.validate();
  const RunContext ctx = make_context(cfg, series);
  if (ctx.classes > kMaxPermutationClasses) {
    throw ConfigError("classes", std::to_string(ctx.classes) + " communities exceed the limit of " +
                                     std::to_string(kMaxPermutationClasses));
  }
  ModelDims dims;
  dims.feature_dim = ctx.window.steps.back().features.cols();
  dims.hidden = cfg.hidden;
  dims.embedding = static_cast<std::size_t>(ctx.classes);
  dims.attention = cfg.attention;
  dims.metapath_count = cfg.metapaths.size();
  auto init_rng = make_rng(cfg.seed, RngStream::init);

  TrainResult result;
  Checkpoint& ck = result.checkpoint;
  ck.config = cfg;
  ck.classes = ctx.classes;
  ck.params = ModelParams::glorot(dims, init_rng);

  const std::vector<int> train_labels = masked_labels(ctx, ctx.masks.train);
  const auto eval_rows = report_rows(ctx.masks);
  const ModelOptions options = model_options(cfg);
  ad::Adam adam(ck.params.all(), ad::AdamOptions{cfg.learning_rate});

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    ad::Tape tape;
    const ForwardResult fw = htgcn_forward(tape, ctx.window, ck.params, options);
    const PermutationLoss pl =
        perm_ce_loss(ad::softmax_over_rows(fw.output), train_labels, ctx.classes);
    const double loss = pl.loss.data()(0, 0);
    if (!std::isfinite(loss)) {
      throw NumericError("loss became non-finite at epoch " + std::to_string(epoch));
    }
    tape.backward(pl.loss);

    EpochLog entry;
    entry.epoch = epoch;
    entry.loss = loss;
    entry.heldout = score(ctx, argmax_rows(fw.output.data()), eval_rows);
    if (progress) *progress << entry.to_json().dump() << '\n';
    result.log.push_back(entry);

    adam.step();
    ck.epoch = epoch + 1;

    const auto e = static_cast<std::size_t>(epoch);
    const auto window = static_cast<std::size_t>(cfg.plateau_epochs);
    if (e >= window) {
      const double before = result.log[e - window].loss;
      const double change = std::abs(loss - before) / std::max(std::abs(before), 1e-300);
      if (change < cfg.plateau_tolerance) break;
    }
  }

  ck.metrics = score(ctx, argmax_rows(forward_embedding(ctx, ck.params, cfg)), eval_rows);
  return result;
}

Prediction predict(Checkpoint& checkpoint, const TemporalSeries& series) {
  const RunContext ctx = make_context(checkpoint.config, series);
  check_checkpoint(checkpoint, ctx);
  Prediction p;
  p.embedding = forward_embedding(ctx, checkpoint.params, checkpoint.config);
  p.predicted = argmax_rows(p.embedding);
  p.truth = ctx.labels;
  p.node_ids = ctx.node_ids;
  return p;
}

MetricReport evaluate(Checkpoint& checkpoint, const TemporalSeries& series, MaskKind mask) {
  const RunContext ctx = make_context(checkpoint.config, series);
  check_checkpoint(checkpoint, ctx);
  std::vector<std::size_t> rows;
  switch (mask) {
    case MaskKind::heldout:
      rows.assign(report_rows(ctx.masks).begin(), report_rows(ctx.masks).end());
      break;
    case MaskKind::train:
      rows = ctx.masks.train;
      break;
    case MaskKind::all:
      rows = ctx.masks.train;
      rows.insert(rows.end(), ctx.masks.heldout.begin(), ctx.masks.heldout.end());
      std::sort(rows.begin(), rows.end());
      break;
  }
  const auto predicted =
      argmax_rows(forward_embedding(ctx, checkpoint.params, checkpoint.config));
  return score(ctx, predicted, rows);
}

void export_embeddings(const Prediction& prediction, std::ostream& out) {
  out << "node_id\ttrue_label\tpredicted_label";
  for (std::size_t k = 0; k < prediction.embedding.cols(); ++k) out << "\temb_" << k;
  out << '\n';
  for (std::size_t i = 0; i < prediction.embedding.rows(); ++i) {
    out << prediction.node_ids[i] << '\t' << prediction.truth[i] << '\t'
        << prediction.predicted[i];
    for (double v : prediction.embedding.row(i)) out << '\t' << format_double(v);
    out << '\n';
  }
}

void export_embeddings(Checkpoint& checkpoint, const TemporalSeries& series,
                       const std::filesystem::path& path) {
  const Prediction p = predict(checkpoint, series);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  export_embeddings(p, out);
  if (!out) throw IoError("failed writing " + path.string());
}

GradCheckInstance gradcheck_instance(std::uint64_t seed) {
  GenConfig g;
  g.community_count = 3;
  g.nodes_per_type = {10, 5, 3};
  g.time_steps = 3;
  g.p_in = 0.5;
  g.p_out = 0.1;
  g.churn_rate = 0.2;
  g.migration_rate = 0.1;
  g.feature_dim = 4;
  g.feature_noise = 0.5;
  g.seed = seed;

  RunConfig cfg;
  cfg.window_length = 3;
  cfg.hidden = 4;
  cfg.attention = 3;
  cfg.seed = seed;
  cfg.label_rate = 1.0;
  return {generate_series(g), cfg};
}

ad::GradCheckReport run_gradcheck(std::uint64_t seed, double h) {
  const GradCheckInstance inst = gradcheck_instance(seed);
  const RunContext ctx = make_context(inst.config, inst.series);
  ModelDims dims{ctx.window.steps.back().features.cols(), inst.config.hidden,
                 static_cast<std::size_t>(ctx.classes), inst.config.attention,
                 inst.config.metapaths.size()};
  auto init_rng = make_rng(seed, RngStream::init);
  ModelParams params = ModelParams::glorot(dims, init_rng);
  const ModelOptions options = model_options(inst.config);

  const ad::LossFn loss = [&](ad::Tape& tape) {
    const ForwardResult fw = htgcn_forward(tape, ctx.window, params, options);
    return perm_ce_loss(ad::softmax_over_rows(fw.output), ctx.labels, ctx.classes).loss;
  };
  const auto all = params.all();
  return ad::finite_difference_check(loss, all, h);
}

}  // namespace htgcn
