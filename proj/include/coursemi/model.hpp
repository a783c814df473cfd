#pragma once

#include <string>
#include <vector>

#include "coursemi/autograd.hpp"
#include "coursemi/encoder.hpp"
#include "coursemi/fusion.hpp"
#include "coursemi/metapath.hpp"
#include "coursemi/objectives.hpp"

namespace coursemi {

struct LossWeights {
  double q = 1.0;
  double j = 1.0;
  double s = 1.0;
  double y = 1.0;
};

struct LossBreakdown {
  double q = 0.0;
  double j = 0.0;
  double s = 0.0;
  double y = 0.0;
  double total = 0.0;
};

// λ_q L_q + λ_j L_j + λ_s L_s + λ_y L_y (the `total` field of `c` is ignored).
double total_loss(const LossBreakdown& c, const LossWeights& w);

struct ModelConfig {
  std::size_t feature_dim = 128;
  std::size_t embed_dim = 128;
  // 0 means "same as embed_dim".
  std::size_t attention_dim = 0;
  std::size_t encoder_depth = 1;
  bool share_encoder = false;
  bool share_agreement_discriminator = false;
  AttentionPooling pooling = AttentionPooling::MeanOverCourses;

  std::size_t effective_attention_dim() const { return attention_dim ? attention_dim : embed_dim; }
};

// Random draws consumed by one training step.
struct EpochSamples {
  Tensor dropout_mask;  // empty: no dropout
  std::vector<EdgeSampleBatch> edges;
  std::vector<CorruptionPlan> agreement;
  std::vector<CorruptionPlan> consistency;
  CorruptionPlan alignment;
};

struct EmbeddingSet {
  std::vector<std::string> view_labels;
  std::vector<Tensor> views;
  Tensor unified;
  std::vector<double> alpha;
};

// Per-view GCN encoders, shared semantic attention and the three bilinear
// discriminators, all stored in one ParamStore.
class Model {
 public:
  Model(ModelConfig cfg, std::vector<std::string> view_labels);

  // Glorot-uniform matrices, zero bias.
  void init(Rng& rng);

  const ModelConfig& config() const { return cfg_; }
  const std::vector<std::string>& view_labels() const { return labels_; }
  std::size_t num_views() const { return labels_.size(); }
  ParamStore& params() { return params_; }
  const ParamStore& params() const { return params_; }

  std::vector<std::string> encoder_weights(std::size_t view) const;
  std::string agreement_discriminator(std::size_t view) const;

  struct Graph {
    Var total;
    Var q, j, s, y;
    std::vector<Var> views;
    Var unified;
    Var alpha;
  };

  // Records the full objective on `tape`. `views` and `x` must outlive the
  // tape's backward pass.
  Graph forward(Tape& tape, const std::vector<ViewGraph>& views, const Tensor& x,
                const EpochSamples& samples, const LossWeights& weights);

  LossBreakdown evaluate(const std::vector<ViewGraph>& views, const Tensor& x,
                         const EpochSamples& samples, const LossWeights& weights);

  // Inference without dropout.
  EmbeddingSet embed(const std::vector<ViewGraph>& views, const Tensor& x);

  // Draws the dropout mask, edge batches and corruption plans for one step.
  EpochSamples sample(const std::vector<ViewGraph>& views, std::size_t num_features, Rng& rng,
                      std::size_t max_pos, double dropout) const;

 private:
  void check_inputs(const std::vector<ViewGraph>& views, const Tensor& x) const;

  ModelConfig cfg_;
  std::vector<std::string> labels_;
  ParamStore params_;
};

}  // namespace coursemi
