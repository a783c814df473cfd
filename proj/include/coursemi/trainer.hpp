#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

#include "coursemi/hin.hpp"
#include "coursemi/model.hpp"

namespace coursemi {

enum class OptimizerKind { Adam, Sgd };

struct TrainConfig {
  LossWeights lambda;
  std::size_t epochs = 200;
  double lr = 0.001;
  double weight_decay = 0.001;
  double dropout = 0.1;
  std::size_t embed_dim = 128;
  std::size_t feature_dim = 128;
  std::size_t attention_dim = 0;
  std::size_t encoder_depth = 1;
  std::uint64_t seed = 0;
  std::size_t max_pos = 512;
  std::size_t checkpoint_interval = 0;
  OptimizerKind optimizer = OptimizerKind::Adam;
  bool share_encoder = false;
  bool share_agreement_discriminator = false;
  AttentionPooling pooling = AttentionPooling::MeanOverCourses;

  // Throws ConfigError if all λ are zero, any λ is negative, or lr <= 0.
  void validate() const;
  ModelConfig model_config() const;
  // `key = value` lines for every field, in a fixed order.
  std::string echo() const;
};

// Returns `cfg` with λ_j, λ_s, λ_y zeroed except for the listed terms
// (letters J, S, Y, comma separated or not; "" is the reconstruction-only
// base). λ_q is always kept.
TrainConfig loss_variant(TrainConfig cfg, std::string_view variant);

struct EpochLosses {
  std::size_t epoch = 0;
  LossBreakdown losses;
};

struct TrainReport {
  std::vector<EpochLosses> epochs;
  std::vector<std::string> view_labels;
  std::vector<double> alpha;
  double wall_seconds = 0.0;
  std::uint64_t seed = 0;
  std::string config_echo;

  // `epoch L_q L_j L_s L_y total` TSV with a header line.
  std::string log_tsv() const;
  // `metapath alpha` TSV with a header line.
  std::string attention_tsv() const;
};

// Adaptive-moment descent with decoupled weight decay, or plain SGD with the
// same decay. With lr = 0 a step leaves parameters unchanged.
class Optimizer {
 public:
  Optimizer(OptimizerKind kind, double lr, double weight_decay, double beta1 = 0.9,
            double beta2 = 0.999, double eps = 1e-8);
  void step(ParamStore& params);

 private:
  OptimizerKind kind_;
  double lr_, wd_, beta1_, beta2_, eps_;
  std::size_t t_ = 0;
  std::vector<Tensor> m_, v_;
};

struct TrainHooks {
  // Written every `checkpoint_interval` epochs and, on a numeric fault, with
  // the last parameters that produced a finite loss.
  std::string checkpoint_path;
  std::function<void(const EpochLosses&)> on_epoch;
};

struct TrainResult {
  Model model;
  EmbeddingSet embeddings;
  TrainReport report;
};

// Full-batch training on precomputed views. Each epoch draws new edge
// batches, corruption plans and a dropout mask from the seeded generator,
// then takes one optimizer step on the weighted objective.
TrainResult train(const std::vector<ViewGraph>& views, const FeatureMatrix& x,
                  const TrainConfig& cfg, const TrainHooks& hooks = {});
TrainResult train(const HinGraph& g, const FeatureMatrix& x, const std::vector<MetaPath>& mps,
                  const TrainConfig& cfg, const ProjectionOptions& proj = {},
                  const TrainHooks& hooks = {});

}  // namespace coursemi
