#include "htgcn/model.hpp"

#include <cmath>
#include <string>

#include "htgcn/errors.hpp"
#include "htgcn/kernels.hpp"

namespace htgcn {

namespace {

ad::Parameter glorot_parameter(std::string name, std::size_t rows, std::size_t cols,
                               std::mt19937_64& rng) {
  const double a = std::sqrt(6.0 / static_cast<double>(rows + cols));
  std::uniform_real_distribution<double> dist(-a, a);
  DenseMatrix m(rows, cols);
  for (double& v : m.values()) v = dist(rng);
  return ad::Parameter(std::move(name), std::move(m));
}

}  // namespace

ModelParams ModelParams::glorot(const ModelDims& dims, std::mt19937_64& rng) {
  if (dims.feature_dim == 0 || dims.hidden == 0 || dims.embedding == 0 || dims.attention == 0) {
    throw ConfigError("model dimensions", "all of D, h, d, d_a must be positive");
  }
  const std::size_t d = dims.embedding;
  ModelParams p;
  p.hgcn.w0 = glorot_parameter("hgcn.w0", dims.feature_dim, dims.hidden, rng);
  p.hgcn.w1 = glorot_parameter("hgcn.w1", dims.hidden, d, rng);
  for (std::size_t k = 0; k < dims.metapath_count; ++k) {
    p.rescac.compress.push_back(
        glorot_parameter("rescac.compress." + std::to_string(k), d * d, d, rng));
  }
  p.rescac.attn_v = glorot_parameter("rescac.attn_v", dims.attention, d, rng);
  p.rescac.attn_w = glorot_parameter("rescac.attn_w", 1, dims.attention, rng);
  return p;
}

ModelParams ModelParams::zeros(const ModelDims& dims) {
  const std::size_t d = dims.embedding;
  ModelParams p;
  p.hgcn.w0 = ad::Parameter("hgcn.w0", DenseMatrix(dims.feature_dim, dims.hidden));
  p.hgcn.w1 = ad::Parameter("hgcn.w1", DenseMatrix(dims.hidden, d));
  for (std::size_t k = 0; k < dims.metapath_count; ++k) {
    p.rescac.compress.emplace_back("rescac.compress." + std::to_string(k), DenseMatrix(d * d, d));
  }
  p.rescac.attn_v = ad::Parameter("rescac.attn_v", DenseMatrix(dims.attention, d));
  p.rescac.attn_w = ad::Parameter("rescac.attn_w", DenseMatrix(1, dims.attention));
  return p;
}

ModelDims ModelParams::dims() const {
  return ModelDims{hgcn.w0.value.rows(), hgcn.w0.value.cols(), hgcn.w1.value.cols(),
                   rescac.attn_v.value.rows(), rescac.compress.size()};
}

std::vector<ad::Parameter*> ModelParams::all() {
  std::vector<ad::Parameter*> out{&hgcn.w0, &hgcn.w1};
  for (auto& c : rescac.compress) out.push_back(&c);
  out.push_back(&rescac.attn_v);
  out.push_back(&rescac.attn_w);
  return out;
}

std::vector<const ad::Parameter*> ModelParams::all() const {
  std::vector<const ad::Parameter*> out{&hgcn.w0, &hgcn.w1};
  for (const auto& c : rescac.compress) out.push_back(&c);
  out.push_back(&rescac.attn_v);
  out.push_back(&rescac.attn_w);
  return out;
}

PreparedWindow prepare_window(std::span<const HeteroSnapshot> window, TypeTag target_type,
                              const std::vector<MetaPath>& metapaths,
                              const PairingOptions& pairing, std::mt19937_64& rng) {
  if (window.size() < 2) {
    throw ConfigError("window", "needs at least 2 snapshots, got " +
                                    std::to_string(window.size()));
  }
  for (const MetaPath& mp : metapaths) {
    if (mp.head_type() != target_type || mp.tail_type() != target_type) {
      throw ConfigError("meta-path", "'" + mp.to_string() + "' must start and end at target type " +
                                         std::to_string(target_type));
    }
  }
  PreparedWindow out;
  out.target_type = target_type;
  for (const HeteroSnapshot& g : window) {
    out.steps.push_back(
        {normalize_adjacency(collapse_adjacency(g, target_type)), g.feature_matrix(target_type)});
  }
  out.pairs.resize(window.size());
  for (std::size_t t = 1; t < window.size(); ++t) {
    for (const MetaPath& mp : metapaths) {
      const AnchorPairing pairing_t = shared_anchors(window[t - 1], window[t], mp, pairing, rng);
      out.pairs[t].push_back(pair_rows(window[t - 1], window[t], mp, pairing_t));
    }
  }
  return out;
}

ad::Value hgcn_forward(ad::Tape& tape, const DenseMatrix& normalized_adjacency, ad::Value x,
                       HgcnParams& params) {
  if (normalized_adjacency.rows() != x.rows() || normalized_adjacency.cols() != x.rows()) {
    throw ShapeError("hgcn_forward: adjacency " + normalized_adjacency.shape_string() +
                     " does not match features " + x.data().shape_string());
  }
  const ad::Value a = tape.constant(normalized_adjacency);
  const ad::Value w0 = tape.parameter(params.w0);
  const ad::Value w1 = tape.parameter(params.w1);
  const ad::Value hidden = ad::relu(ad::matmul(a, ad::matmul(x, w0)));
  return ad::matmul(a, ad::matmul(hidden, w1));
}

ad::Value interaction_tensor(ad::Value zp, ad::Value xc) {
  if (zp.rows() != xc.rows() || zp.cols() != xc.cols()) {
    throw ShapeError("interaction_tensor: pair matrices " + zp.data().shape_string() + " and " +
                     xc.data().shape_string() + " are not aligned");
  }
  return ad::row_outer(zp, xc);
}

DenseMatrix interaction_tensor(const DenseMatrix& zp, const DenseMatrix& xc) {
  if (!zp.same_shape(xc)) {
    throw ShapeError("interaction_tensor: pair matrices " + zp.shape_string() + " and " +
                     xc.shape_string() + " are not aligned");
  }
  return kernels::row_outer(zp, xc);
}

ad::Value compress_and_inject(ad::Value h, std::span<const std::size_t> target_rows,
                              ad::Value compress, ad::Value z) {
  if (h.rows() != target_rows.size()) {
    throw ShapeError("compress_and_inject: " + std::to_string(h.rows()) + " slices but " +
                     std::to_string(target_rows.size()) + " targets");
  }
  if (h.rows() == 0) return z;
  return ad::scatter_add_rows(z, ad::sigmoid(ad::matmul(h, compress)), target_rows);
}

ad::Value node_attention(ad::Value z, ad::Value attn_v, ad::Value attn_w) {
  if (z.rows() == 0) throw ShapeError("node_attention: no nodes");
  const ad::Value hidden = ad::tanh(ad::matmul(z, ad::transpose(attn_v)));  // N x d_a
  const ad::Value scores = ad::matmul(attn_w, ad::transpose(hidden));       // 1 x N
  return ad::softmax_over_rows(scores);
}

ad::Value apply_attention(ad::Value z, ad::Value weights) { return ad::diag_row_scale(z, weights); }

ad::Value rescac_step(ad::Value prev_z, ad::Value cur_x, std::span<const PairRows> pairs,
                      ResCacParams& params, const ModelOptions& options) {
  if (pairs.size() != params.compress.size()) {
    throw ShapeError("rescac_step: " + std::to_string(pairs.size()) + " meta-path pairings but " +
                     std::to_string(params.compress.size()) + " compression maps");
  }
  ad::Tape& tape = cur_x.tape();
  ad::Value z = cur_x;
  for (std::size_t k = 0; k < pairs.size(); ++k) {
    if (pairs[k].cur_rows.empty()) continue;
    const ad::Value zp = ad::gather_rows(prev_z, pairs[k].prev_rows);
    const ad::Value xc = ad::gather_rows(cur_x, pairs[k].cur_rows);
    z = compress_and_inject(interaction_tensor(zp, xc), pairs[k].cur_rows,
                            tape.parameter(params.compress[k]), z);
  }
  ad::Value weights =
      node_attention(z, tape.parameter(params.attn_v), tape.parameter(params.attn_w));
  if (options.attention_rescale) weights = ad::scale(weights, static_cast<double>(z.rows()));
  return apply_attention(z, weights);
}

ad::Value rescac_step(ad::Value prev_z, ad::Value cur_x, const HeteroSnapshot& prev,
                      const HeteroSnapshot& cur, const std::vector<MetaPath>& metapaths,
                      ResCacParams& params, const ModelOptions& options,
                      const PairingOptions& pairing, std::mt19937_64& rng) {
  std::vector<PairRows> rows;
  for (const MetaPath& mp : metapaths)
    rows.push_back(pair_rows(prev, cur, mp, shared_anchors(prev, cur, mp, pairing, rng)));
  return rescac_step(prev_z, cur_x, rows, params, options);
}

ForwardResult htgcn_forward(ad::Tape& tape, const PreparedWindow& window, ModelParams& params,
                            const ModelOptions& options) {
  if (window.steps.size() < 2) {
    throw ConfigError("window", "needs at least 2 snapshots, got " +
                                    std::to_string(window.steps.size()));
  }
  ForwardResult result;
  for (const SnapshotInput& s : window.steps) {
    result.hgcn.push_back(
        hgcn_forward(tape, s.normalized_adjacency, tape.constant(s.features), params.hgcn));
  }
  if (!options.rescac_enabled) {
    result.output = result.hgcn.back();
    return result;
  }
  ad::Value z = result.hgcn.front();
  for (std::size_t t = 1; t < window.steps.size(); ++t)
    z = rescac_step(z, result.hgcn[t], window.pairs[t], params.rescac, options);
  result.output = ad::add(z, result.hgcn.back());
  return result;
}

}  // namespace htgcn
