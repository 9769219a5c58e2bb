#pragma once

#include <random>
#include <span>
#include <vector>

#include "htgcn/autodiff.hpp"
#include "htgcn/hetero_graph.hpp"
#include "htgcn/metapath.hpp"

namespace htgcn {

struct ModelDims {
  std::size_t feature_dim = 0;   // D
  std::size_t hidden = 16;       // h
  std::size_t embedding = 0;     // d, equal to the community count
  std::size_t attention = 8;     // d_a
  std::size_t metapath_count = 0;
};

struct HgcnParams {
  ad::Parameter w0;  // D x h
  ad::Parameter w1;  // h x d
};

struct ResCacParams {
  std::vector<ad::Parameter> compress;  // one d^2 x d map per meta-path
  ad::Parameter attn_v;                 // d_a x d
  ad::Parameter attn_w;                 // 1 x d_a
};

struct ModelParams {
  HgcnParams hgcn;
  ResCacParams rescac;

  // Glorot-uniform on [-a, a], a = sqrt(6 / (fan_in + fan_out)), drawn in a fixed order.
  static ModelParams glorot(const ModelDims& dims, std::mt19937_64& rng);
  static ModelParams zeros(const ModelDims& dims);

  ModelDims dims() const;
  std::vector<ad::Parameter*> all();
  std::vector<const ad::Parameter*> all() const;
};

struct ModelOptions {
  bool rescac_enabled = true;      // false gives the HGCN-only ablation
  bool attention_rescale = false;  // multiply attention weights by N
};

// Per-snapshot inputs restricted to the target node type.
struct SnapshotInput {
  DenseMatrix normalized_adjacency;
  DenseMatrix features;
};

// Everything the forward pass needs, precomputed once per run so that every
// epoch sees the same sampled pairs.
struct PreparedWindow {
  TypeTag target_type = 0;
  std::vector<SnapshotInput> steps;
  // pairs[t][k]: rows pairing step t-1 with step t under meta-path k; pairs[0] is empty.
  std::vector<std::vector<PairRows>> pairs;
};

PreparedWindow prepare_window(std::span<const HeteroSnapshot> window, TypeTag target_type,
                              const std::vector<MetaPath>& metapaths,
                              const PairingOptions& pairing, std::mt19937_64& rng);

// Two-layer heterogeneous GCN: A relu(A X W0) W1, linear second layer.
ad::Value hgcn_forward(ad::Tape& tape, const DenseMatrix& normalized_adjacency, ad::Value x,
                       HgcnParams& params);

// Per-pair feature outer products, flattened: H[p, i*d + j] = zp[p,i] * xc[p,j].
// The P x d x d tensor is stored as P x d^2.
ad::Value interaction_tensor(ad::Value zp, ad::Value xc);
DenseMatrix interaction_tensor(const DenseMatrix& zp, const DenseMatrix& xc);

// z + scatter(sigmoid(H * compress)) into the rows named by target_rows.
ad::Value compress_and_inject(ad::Value h, std::span<const std::size_t> target_rows,
                              ad::Value compress, ad::Value z);

// softmax over nodes of attn_w * tanh(attn_v * z_i^T); returned as 1 x N.
ad::Value node_attention(ad::Value z, ad::Value attn_v, ad::Value attn_w);

// Row i scaled by weights[i].
ad::Value apply_attention(ad::Value z, ad::Value weights);

// One cross-time aggregation step from the carried embedding of t-1 to t.
ad::Value rescac_step(ad::Value prev_z, ad::Value cur_x, std::span<const PairRows> pairs,
                      ResCacParams& params, const ModelOptions& options);

// Convenience overload that samples the pairs from the two snapshots itself.
ad::Value rescac_step(ad::Value prev_z, ad::Value cur_x, const HeteroSnapshot& prev,
                      const HeteroSnapshot& cur, const std::vector<MetaPath>& metapaths,
                      ResCacParams& params, const ModelOptions& options,
                      const PairingOptions& pairing, std::mt19937_64& rng);

struct ForwardResult {
  ad::Value output;               // N^T x d
  std::vector<ad::Value> hgcn;    // per-step GCN embeddings
};

ForwardResult htgcn_forward(ad::Tape& tape, const PreparedWindow& window, ModelParams& params,
                            const ModelOptions& options);

}  // namespace htgcn
