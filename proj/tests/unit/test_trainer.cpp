#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "htgcn/datagen.hpp"
#include "htgcn/errors.hpp"
#include "htgcn/trainer.hpp"

using namespace htgcn;

namespace {

TemporalSeries easy_series(std::uint64_t seed, int steps = 3) {
  GenConfig cfg;
  cfg.time_steps = steps;
  cfg.seed = seed;
  return generate_series(cfg);
}

TemporalSeries small_series(std::uint64_t seed, int steps = 3) {
  GenConfig cfg;
  cfg.nodes_per_type = {60, 20, 6};
  cfg.time_steps = steps;
  cfg.feature_dim = 6;
  cfg.seed = seed;
  return generate_series(cfg);
}

RunConfig quick_config(int epochs) {
  RunConfig cfg;
  cfg.epochs = epochs;
  return cfg;
}

std::string log_text(const TrainResult& r) {
  std::string s;
  for (const auto& e : r.log) s += e.to_json().dump() + "\n";
  return s;
}

std::string export_text(Checkpoint& ck, const TemporalSeries& s) {
  std::ostringstream out;
  export_embeddings(predict(ck, s), out);
  return out.str();
}

}  // namespace

TEST_CASE("run config validation and json round trip") {
  RunConfig cfg;
  CHECK_NOTHROW(cfg.validate());
  cfg.window_length = 4;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg = RunConfig{};
  cfg.label_rate = 0.0;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg = RunConfig{};
  cfg.metapaths.clear();
  CHECK_THROWS_AS(cfg.validate(), ConfigError);

  cfg = RunConfig{};
  cfg.window_length = 5;
  cfg.learning_rate = 0.0123;
  cfg.seed = 99;
  cfg.attention_rescale = true;
  cfg.metapaths = MetaPath::parse_list("0-0-1-0-0");
  const RunConfig back = RunConfig::from_json(nlohmann::json::parse(cfg.to_json().dump()));
  CHECK(back.window_length == 5);
  CHECK(back.learning_rate == 0.0123);
  CHECK(back.seed == 99);
  CHECK(back.attention_rescale);
  CHECK(back.metapaths == cfg.metapaths);
  CHECK(back.to_json() == cfg.to_json());
}

TEST_CASE("label masks partition the labeled rows") {
  const std::vector<int> labels{0, -1, 1, 2, 2, -1, 0, 1, 1, 0};
  const LabelMasks m = split_labels(labels, 0.5, 3);
  std::set<std::size_t> all(m.train.begin(), m.train.end());
  for (std::size_t r : m.heldout) CHECK(all.insert(r).second);
  CHECK(all == std::set<std::size_t>{0, 2, 3, 4, 6, 7, 8, 9});
  CHECK(m.train.size() == 4);
  CHECK(std::is_sorted(m.train.begin(), m.train.end()));

  const LabelMasks again = split_labels(labels, 0.5, 3);
  CHECK(again.train == m.train);
  CHECK(split_labels(labels, 1.0, 3).heldout.empty());
  CHECK(split_labels(labels, 0.01, 3).train.size() == 1);
}

TEST_CASE("mask names") {
  CHECK(parse_mask_kind("heldout") == MaskKind::heldout);
  CHECK(parse_mask_kind("train") == MaskKind::train);
  CHECK(parse_mask_kind("all") == MaskKind::all);
  CHECK_THROWS_AS(parse_mask_kind("test"), ConfigError);
}

TEST_CASE("rng streams are independent and reproducible") {
  auto a = make_rng(5, RngStream::init);
  auto b = make_rng(5, RngStream::init);
  auto c = make_rng(5, RngStream::masks);
  const auto x = a();
  CHECK(x == b());
  CHECK(x != c());
}

TEST_CASE("zero epochs returns the initial parameters") {
  const auto s = small_series(1);
  const TrainResult r = train(quick_config(0), s);
  CHECK(r.log.empty());
  CHECK(r.checkpoint.epoch == 0);
  auto rng = make_rng(1, RngStream::init);
  ModelDims dims{6, 16, 3, 8, 2};
  const ModelParams init = ModelParams::glorot(dims, rng);
  CHECK(r.checkpoint.params.hgcn.w0.value == init.hgcn.w0.value);
  CHECK(r.checkpoint.params.rescac.attn_w.value == init.rescac.attn_w.value);
}

TEST_CASE("training is deterministic") {
  const auto s = small_series(2);
  const TrainResult a = train(quick_config(15), s);
  const TrainResult b = train(quick_config(15), s);
  CHECK(log_text(a) == log_text(b));
  CHECK(a.checkpoint.to_json().dump() == b.checkpoint.to_json().dump());
}

TEST_CASE("progress lines match the log") {
  const auto s = small_series(2);
  std::ostringstream progress;
  const TrainResult r = train(quick_config(5), s, &progress);
  CHECK(progress.str() == log_text(r));
  const auto first = nlohmann::json::parse(log_text(r).substr(0, log_text(r).find('\n')));
  CHECK(first.contains("loss"));
  CHECK(first["heldout"].contains("NMI"));
}

TEST_CASE("loss mostly decreases on the easy instance and early stop triggers on plateau") {
  const auto s = easy_series(3);
  const TrainResult r = train(quick_config(200), s);
  REQUIRE(r.log.size() > 10);
  std::size_t down = 0;
  for (std::size_t e = 1; e < r.log.size(); ++e) down += r.log[e].loss <= r.log[e - 1].loss;
  CHECK(static_cast<double>(down) >= 0.9 * static_cast<double>(r.log.size() - 1));

  RunConfig flat = quick_config(200);
  flat.learning_rate = 1e-12;
  flat.plateau_epochs = 5;
  flat.plateau_tolerance = 1e-3;
  CHECK(train(flat, small_series(3)).log.size() == 6);
}

TEST_CASE("evaluate ordering and chance level") {
  const auto s = easy_series(4);
  TrainResult r = train(quick_config(60), s);
  const MetricReport tr = evaluate(r.checkpoint, s, MaskKind::train);
  const MetricReport ho = evaluate(r.checkpoint, s, MaskKind::heldout);
  CHECK(tr.acc >= ho.acc);
  CHECK(ho.acc == r.checkpoint.metrics.acc);

}

TEST_CASE("untrained parameters land near chance when inputs carry no signal") {
  double mean = 0.0;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    RunConfig cfg = quick_config(0);
    cfg.seed = seed;
    GenConfig g;
    g.p_in = 0.0101;
    g.p_out = 0.01;
    g.feature_noise = 50.0;
    g.seed = 100 + seed;
    const auto series = generate_series(g);
    TrainResult init = train(cfg, series);
    const double acc = evaluate(init.checkpoint, series, MaskKind::all).acc;
    CHECK(acc >= 1.0 / 3.0 - 1e-12);
    mean += acc / 20.0;
  }
  CHECK(mean <= 1.0 / 3.0 + 0.15);
}

TEST_CASE("checkpoint round trip reproduces the forward pass") {
  const auto s = small_series(5);
  TrainResult r = train(quick_config(10), s);
  const auto path = std::filesystem::temp_directory_path() / "htgcn_ck_test.json";
  r.checkpoint.save(path);
  Checkpoint back = Checkpoint::load(path);
  CHECK(back.epoch == r.checkpoint.epoch);
  CHECK(back.classes == 3);
  CHECK(predict(back, s).embedding == predict(r.checkpoint, s).embedding);
  std::filesystem::remove(path);

  auto j = nlohmann::json::parse(r.checkpoint.to_json().dump());
  j["format"] = "other";
  CHECK_THROWS_AS(Checkpoint::from_json(j), ConfigError);
  j = nlohmann::json::parse(r.checkpoint.to_json().dump());
  j["params"][0]["rows"] = 5;
  CHECK_THROWS_AS(Checkpoint::from_json(j), Error);

  // a checkpoint trained on 6-wide features does not fit 16-wide ones
  CHECK_THROWS_AS(predict(back, easy_series(1)), ShapeError);
  CHECK_THROWS_AS(Checkpoint::load("/nonexistent/ck.json"), IoError);
}

TEST_CASE("embedding export") {
  const auto s = small_series(6);
  TrainResult r = train(quick_config(5), s);
  const std::string text = export_text(r.checkpoint, s);
  CHECK(text == export_text(r.checkpoint, s));
  std::istringstream in(text);
  std::string header;
  std::getline(in, header);
  CHECK(header == "node_id\ttrue_label\tpredicted_label\temb_0\temb_1\temb_2");
  std::size_t rows = 0;
  for (std::string line; std::getline(in, line);) {
    ++rows;
    CHECK(std::count(line.begin(), line.end(), '\t') == 5);
  }
  CHECK(rows == s.back().nodes_of_type(0).size());
  CHECK_THROWS_AS(export_embeddings(r.checkpoint, s, "/nonexistent/dir/e.tsv"), IoError);
}

TEST_CASE("precondition errors") {
  const auto two = small_series(7, 2);
  CHECK_THROWS_AS(train(quick_config(1), two), ConfigError);

  GenConfig unlabeled;
  unlabeled.nodes_per_type = {20, 10, 4};
  unlabeled.time_steps = 3;
  unlabeled.feature_dim = 3;
  unlabeled.labeled_type = 1;
  CHECK_THROWS_AS(train(quick_config(1), generate_series(unlabeled)), ConfigError);

  RunConfig nan = quick_config(3);
  nan.learning_rate = 1e300;
  CHECK_THROWS_AS(train(nan, small_series(7)), NumericError);
}

TEST_CASE("gradient check instance") {
  const GradCheckInstance inst = gradcheck_instance(1);
  CHECK(inst.series.size() == 3);
  for (const auto& g : inst.series.snapshots()) CHECK(g.nodes_of_type(0).size() <= 12);
  CHECK(inst.config.metapaths.size() == 2);
  CHECK(run_gradcheck(1).max_relative_error < 1e-5);
}
