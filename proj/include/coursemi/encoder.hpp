#pragma once

#include <cstddef>
#include <optional>
#include <random>
#include <utility>
#include <vector>

#include "coursemi/autograd.hpp"
#include "coursemi/metapath.hpp"

namespace coursemi {

using Rng = std::mt19937_64;
using IndexPair = std::pair<std::size_t, std::size_t>;

// Weight stack of one view's GCN encoder: first layer d×·, last layer ·×k.
struct ViewEncoder {
  std::vector<Tensor> weights;
  std::size_t depth() const { return weights.size(); }
};

// Positive pairs are sampled edges, negatives are sampled non-edges (1:1).
struct EdgeSampleBatch {
  std::vector<IndexPair> pos;
  std::vector<IndexPair> neg;
  bool empty() const { return pos.empty() && neg.empty(); }
};

// Â·X·W for one layer; deeper stacks apply ReLU between propagations.
Var encode(Tape& tape, const Tensor& a_hat, Var x, const std::vector<Var>& weights);
Tensor encode(const ViewGraph& view, const Tensor& x, const ViewEncoder& enc);

// Inner-product logits ⟨h_i, h_j⟩ for each pair, as a P×1 column.
Var pair_logits(Tape& tape, Var h, const std::vector<IndexPair>& pairs);
// σ(⟨h_i, h_j⟩) for each pair. Only the requested entries are computed.
std::vector<double> decode_pairs(const Tensor& h, const std::vector<IndexPair>& pairs);

// Uniform sample of min(max_pos, |E|) edges without replacement and as many
// distinct non-edges (i != j), never overlapping the positives. When fewer
// non-edges exist than positives, all of them are used.
EdgeSampleBatch sample_edges(const ViewGraph& view, Rng& rng, std::size_t max_pos);

// mean softplus(-pos) + mean softplus(neg): binary cross-entropy of sigmoid
// scores with positives labelled 1 and negatives 0. Either side may be
// absent; with both absent the result is a constant 0.
Var contrastive_bce(Tape& tape, std::optional<Var> pos_logits, std::optional<Var> neg_logits);

// Reconstruction loss of one view's sampled pairs.
Var recon_loss(Tape& tape, Var h, const EdgeSampleBatch& batch);
double recon_loss(const Tensor& h, const EdgeSampleBatch& batch);
// Average of the per-view losses.
double recon_loss(const std::vector<Tensor>& hs, const std::vector<EdgeSampleBatch>& batches);

}  // namespace coursemi
