#include "coursemi/fusion.hpp"

#include "coursemi/error.hpp"

namespace coursemi {

AttentionPooling parse_attention_pooling(std::string_view s) {
  if (s == "mean" || s == "mean_over_courses") return AttentionPooling::MeanOverCourses;
  if (s == "sum_over_views") return AttentionPooling::SumOverViews;
  throw ConfigError("unknown attention pooling '" + std::string(s) + "'");
}

std::string_view to_string(AttentionPooling p) {
  return p == AttentionPooling::MeanOverCourses ? "mean" : "sum_over_views";
}

Var view_importance(Tape& tape, Var h, Var projection, Var bias, Var query,
                    AttentionPooling pooling, std::size_t num_views) {
  const Var proj = tape.add_row(tape.matmul(h, projection), bias);
  const Var per_course = tape.tanh(tape.matmul(proj, query));
  if (pooling == AttentionPooling::MeanOverCourses) return tape.mean_all(per_course);
  return tape.scale(tape.sum_all(per_course), 1.0 / static_cast<double>(num_views));
}

double view_importance(const Tensor& h, const AttentionParams& p, AttentionPooling pooling,
                       std::size_t num_views) {
  Tape tape;
  const Var out = view_importance(tape, tape.constant(h), tape.constant(p.projection),
                                  tape.constant(p.bias), tape.constant(p.query), pooling, num_views);
  return tape.value(out).item();
}

Var normalize_weights(Tape& tape, const std::vector<Var>& scores) {
  return tape.softmax_vec(tape.concat_scalars(scores));
}

std::vector<double> normalize_weights(std::span<const double> scores) {
  const Tensor alpha = ops::softmax_vec(Tensor::row_vector(scores));
  return {alpha.data().begin(), alpha.data().end()};
}

Var fuse(Tape& tape, const std::vector<Var>& views, Var alpha) {
  if (views.empty() || tape.value(alpha).size() != views.size()) {
    throw ShapeError("fuse: " + std::to_string(views.size()) + " views vs " +
                     std::to_string(tape.value(alpha).size()) + " weights");
  }
  Var h = tape.mul_scalar(tape.element(alpha, 0, 0), views[0]);
  for (std::size_t v = 1; v < views.size(); ++v) {
    h = tape.add(h, tape.mul_scalar(tape.element(alpha, 0, v), views[v]));
  }
  return h;
}

Tensor fuse(const std::vector<Tensor>& views, std::span<const double> alpha) {
  Tape tape;
  std::vector<Var> vs;
  for (const auto& v : views) vs.push_back(tape.constant(v));
  return tape.value(fuse(tape, vs, tape.constant(Tensor::row_vector(alpha))));
}

}  // namespace coursemi
