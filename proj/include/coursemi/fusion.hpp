#pragma once

#include <span>
#include <string_view>
#include <vector>

#include "coursemi/autograd.hpp"

namespace coursemi {

// How per-course attention terms are pooled into one score per view.
enum class AttentionPooling {
  // mean over all course rows (default)
  MeanOverCourses,
  // sum over course rows scaled by 1/|views|
  SumOverViews,
};

AttentionPooling parse_attention_pooling(std::string_view s);
std::string_view to_string(AttentionPooling p);

// Shared across views: projection k×k', bias 1×k', query k'×1.
struct AttentionParams {
  Tensor projection;
  Tensor bias;
  Tensor query;
};

// Raw importance of one view: pooled tanh(qᵀ(W'ᵀh_j + b)) over course rows.
Var view_importance(Tape& tape, Var h, Var projection, Var bias, Var query,
                    AttentionPooling pooling, std::size_t num_views);
double view_importance(const Tensor& h, const AttentionParams& p,
                       AttentionPooling pooling = AttentionPooling::MeanOverCourses,
                       std::size_t num_views = 1);

// Softmax of the raw view scores, as a 1×V row.
Var normalize_weights(Tape& tape, const std::vector<Var>& scores);
std::vector<double> normalize_weights(std::span<const double> scores);

// Σ α_v h_v, with α a 1×V row.
Var fuse(Tape& tape, const std::vector<Var>& views, Var alpha);
Tensor fuse(const std::vector<Tensor>& views, std::span<const double> alpha);

}  // namespace coursemi
