#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "coursemi/hin.hpp"
#include "coursemi/trainer.hpp"

namespace coursemi {

struct SplitPlan {
  std::vector<std::size_t> train;  // course local indices
  std::vector<std::size_t> test;
  std::uint64_t seed = 0;
  double ratio = 0.8;
};

// Seeded shuffle of the labelled courses, then a prefix of
// floor(ratio · N) goes to training. Throws ConfigError for fewer than two
// labelled courses or a ratio outside (0, 1).
SplitPlan split(const CourseLabels& labels, double ratio, std::uint64_t seed);

struct ClassifierOptions {
  std::size_t epochs = 500;
  double lr = 0.01;
  std::uint64_t seed = 0;
};

// Multinomial logistic regression on frozen embeddings, fitted with the
// same tape and optimizer as the representation model. Inputs are
// standardized with training-set column statistics.
class SoftmaxClassifier {
 public:
  void fit(const Tensor& x, std::span<const int> y, int num_classes,
           const ClassifierOptions& opts = {});
  Tensor logits(const Tensor& x) const;
  std::vector<int> predict(const Tensor& x) const;

  // True when the training labels held a single class; predict() then
  // returns that class.
  bool degenerate() const { return constant_class_ >= 0; }
  int num_classes() const { return num_classes_; }
  // Gradient of the mean cross-entropy w.r.t. the current weights, for checking.
  Tensor weight_gradient(const Tensor& x, std::span<const int> y) const;
  const Tensor& weights() const { return weights_; }
  Tensor& weights() { return weights_; }
  // Mean cross-entropy of the current weights.
  double loss(const Tensor& x, std::span<const int> y) const;

 private:
  Tensor standardize(const Tensor& x) const;

  int num_classes_ = 0;
  int constant_class_ = -1;
  Tensor mean_;
  Tensor scale_;
  Tensor weights_;  // (dim + 1) × classes, last row is the bias
};

// Fraction of positions where y == yhat. Throws ConfigError on empty or
// unequal inputs.
double accuracy(std::span<const int> y, std::span<const int> yhat);
// Unweighted mean over classes of 2PR/(P+R); a class's F1 is 0 when
// P + R = 0, and classes absent from both y and yhat are left out.
double macro_f1(std::span<const int> y, std::span<const int> yhat, int num_classes);

struct MetricsRow {
  std::string setting;
  double accuracy = 0.0;
  double macro_f1 = 0.0;
  // Per-seed values behind a median row; empty for single runs.
  std::vector<double> accuracy_runs;
  std::vector<double> macro_f1_runs;
};

struct EvalOptions {
  double split_ratio = 0.8;
  std::uint64_t split_seed = 0;
  ClassifierOptions classifier;
  // Train the probe on [unified | view_1 | ... | view_V] instead of the unified embedding.
  bool concat_views = false;
};

MetricsRow evaluate_embeddings(const EmbeddingSet& emb, const CourseLabels& labels,
                               const EvalOptions& opts, std::string setting = "");
MetricsRow evaluate_embedding(const Tensor& h, const CourseLabels& labels, const EvalOptions& opts,
                              std::string setting = "");

struct AblationOptions {
  TrainConfig train;
  EvalOptions eval;
  ProjectionOptions projection;
  // One train+eval run per seed; rows report medians. The seed drives both
  // training and the split.
  std::vector<std::uint64_t> seeds{0, 1, 2, 3, 4};
  // Worker threads for independent cells.
  std::size_t jobs = 1;
  // Meta-path universe for the subset ablation.
  std::vector<MetaPath> metapaths = MetaPath::all();
  // ablate_losses: also emit the reconstruction-only base row first.
  bool include_base = false;
};

double median(std::vector<double> v);

// Label for a view subset, e.g. "MP1&MP3".
std::string subset_label(const std::vector<MetaPath>& mps);

// Seven rows, one per non-empty subset of the meta-paths: singles, pairs, all.
std::vector<MetricsRow> ablate_metapaths(const HinGraph& g, const FeatureMatrix& x,
                                         const CourseLabels& labels, const AblationOptions& opts);
// Rows J, S, Y, J,S, J,Y, S,Y, J,S,Y (plus "base" when requested).
std::vector<MetricsRow> ablate_losses(const HinGraph& g, const FeatureMatrix& x,
                                      const CourseLabels& labels, const AblationOptions& opts);

// `setting accuracy macro_f1` TSV.
std::string metrics_tsv(const std::vector<MetricsRow>& rows);
// Fixed-width plain-text table.
std::string render_table(const std::vector<MetricsRow>& rows, const std::string& first_column);

}  // namespace coursemi
