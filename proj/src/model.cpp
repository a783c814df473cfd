#include "coursemi/model.hpp"

#include <cmath>

#include "coursemi/error.hpp"

namespace coursemi {

double total_loss(const LossBreakdown& c, const LossWeights& w) {
  return w.q * c.q + w.j * c.j + w.s * c.s + w.y * c.y;
}

Model::Model(ModelConfig cfg, std::vector<std::string> view_labels)
    : cfg_(cfg), labels_(std::move(view_labels)) {
  if (labels_.empty()) throw ConfigError("model needs at least one view");
  if (cfg_.feature_dim == 0 || cfg_.embed_dim == 0) throw ConfigError("dimensions must be positive");
  if (cfg_.encoder_depth == 0) throw ConfigError("encoder depth must be >= 1");

  const auto d = cfg_.feature_dim;
  const auto k = cfg_.embed_dim;
  const auto ka = cfg_.effective_attention_dim();

  const auto add_encoder = [&](const std::string& tag) {
    for (std::size_t l = 0; l < cfg_.encoder_depth; ++l) {
      params_.add("encoder." + tag + ".w" + std::to_string(l), Tensor(l == 0 ? d : k, k));
    }
  };
  if (cfg_.share_encoder) {
    add_encoder("shared");
  } else {
    for (const auto& label : labels_) add_encoder(label);
  }
  params_.add("attention.projection", Tensor(k, ka));
  params_.add("attention.bias", Tensor(1, ka));
  params_.add("attention.query", Tensor(ka, 1));
  if (cfg_.share_agreement_discriminator) {
    params_.add("disc.agreement.shared", Tensor(d, k));
  } else {
    for (const auto& label : labels_) params_.add("disc.agreement." + label, Tensor(d, k));
  }
  params_.add("disc.consistency", Tensor(k, k));
  params_.add("disc.alignment", Tensor(k, k));
}

void Model::init(Rng& rng) {
  for (auto& slot : params_.slots()) {
    auto& v = slot.value;
    if (slot.name.ends_with(".bias")) {
      for (auto& x : v.data()) x = 0.0;
      continue;
    }
    const double s = std::sqrt(6.0 / static_cast<double>(v.rows() + v.cols()));
    std::uniform_real_distribution<double> u(-s, s);
    for (auto& x : v.data()) x = u(rng);
  }
  params_.zero_grad();
}

std::vector<std::string> Model::encoder_weights(std::size_t view) const {
  const std::string tag = cfg_.share_encoder ? "shared" : labels_.at(view);
  std::vector<std::string> names;
  for (std::size_t l = 0; l < cfg_.encoder_depth; ++l) {
    names.push_back("encoder." + tag + ".w" + std::to_string(l));
  }
  return names;
}

std::string Model::agreement_discriminator(std::size_t view) const {
  return "disc.agreement." + (cfg_.share_agreement_discriminator ? std::string("shared")
                                                                 : labels_.at(view));
}

void Model::check_inputs(const std::vector<ViewGraph>& views, const Tensor& x) const {
  if (views.size() != labels_.size()) {
    throw ShapeError("model built for " + std::to_string(labels_.size()) + " views, got " +
                     std::to_string(views.size()));
  }
  if (x.cols() != cfg_.feature_dim) {
    throw ShapeError("features have " + std::to_string(x.cols()) + " columns, model expects " +
                     std::to_string(cfg_.feature_dim));
  }
  for (std::size_t v = 0; v < views.size(); ++v) {
    if (views[v].metapath.label != labels_[v]) {
      throw ShapeError("view " + std::to_string(v) + " is '" + views[v].metapath.label +
                       "', model expects '" + labels_[v] + "'");
    }
    if (views[v].num_courses() != x.rows()) {
      throw ShapeError("view '" + labels_[v] + "' has " + std::to_string(views[v].num_courses()) +
                       " courses but features have " + std::to_string(x.rows()) + " rows");
    }
  }
}

Model::Graph Model::forward(Tape& tape, const std::vector<ViewGraph>& views, const Tensor& x,
                            const EpochSamples& samples, const LossWeights& weights) {
  check_inputs(views, x);
  const std::size_t nv = views.size();
  if (samples.edges.size() != nv || samples.agreement.size() != nv ||
      samples.consistency.size() != nv) {
    throw ShapeError("epoch samples do not match the number of views");
  }

  Graph g;
  const Var x_raw = tape.constant(x);
  const Var x_in = samples.dropout_mask.empty() ? x_raw : tape.apply_mask(x_raw, samples.dropout_mask);

  for (std::size_t v = 0; v < nv; ++v) {
    std::vector<Var> ws;
    for (const auto& name : encoder_weights(v)) ws.push_back(tape.param(params_, name));
    g.views.push_back(encode(tape, views[v].normalized, x_in, ws));
  }

  const Var proj = tape.param(params_, "attention.projection");
  const Var bias = tape.param(params_, "attention.bias");
  const Var query = tape.param(params_, "attention.query");
  std::vector<Var> scores;
  for (const auto& h : g.views) {
    scores.push_back(view_importance(tape, h, proj, bias, query, cfg_.pooling, nv));
  }
  g.alpha = normalize_weights(tape, scores);
  g.unified = fuse(tape, g.views, g.alpha);

  std::optional<Var> lq;
  for (std::size_t v = 0; v < nv; ++v) {
    const Var l = recon_loss(tape, g.views[v], samples.edges[v]);
    lq = lq ? tape.add(*lq, l) : l;
  }
  g.q = tape.scale(*lq, 1.0 / static_cast<double>(nv));

  std::vector<Var> dj;
  for (std::size_t v = 0; v < nv; ++v) dj.push_back(tape.param(params_, agreement_discriminator(v)));
  g.j = agreement_loss(tape, x_raw, g.unified, dj, samples.agreement);

  g.s = consistency_loss(tape, g.unified, g.views, tape.param(params_, "disc.consistency"),
                         samples.consistency);

  const Var summary = platform_summary(tape, g.unified);
  g.y = alignment_loss(tape, g.unified, summary, tape.param(params_, "disc.alignment"),
                       samples.alignment);

  g.total = tape.add(tape.add(tape.scale(g.q, weights.q), tape.scale(g.j, weights.j)),
                     tape.add(tape.scale(g.s, weights.s), tape.scale(g.y, weights.y)));
  return g;
}

LossBreakdown Model::evaluate(const std::vector<ViewGraph>& views, const Tensor& x,
                              const EpochSamples& samples, const LossWeights& weights) {
  Tape tape;
  const auto g = forward(tape, views, x, samples, weights);
  return {tape.value(g.q).item(), tape.value(g.j).item(), tape.value(g.s).item(),
          tape.value(g.y).item(), tape.value(g.total).item()};
}

EmbeddingSet Model::embed(const std::vector<ViewGraph>& views, const Tensor& x) {
  check_inputs(views, x);
  Tape tape;
  const Var x_in = tape.constant(x);
  std::vector<Var> hs;
  for (std::size_t v = 0; v < views.size(); ++v) {
    std::vector<Var> ws;
    for (const auto& name : encoder_weights(v)) ws.push_back(tape.param(params_, name));
    hs.push_back(encode(tape, views[v].normalized, x_in, ws));
  }
  const Var proj = tape.param(params_, "attention.projection");
  const Var bias = tape.param(params_, "attention.bias");
  const Var query = tape.param(params_, "attention.query");
  std::vector<Var> scores;
  for (const auto& h : hs) scores.push_back(view_importance(tape, h, proj, bias, query, cfg_.pooling, hs.size()));
  const Var alpha = normalize_weights(tape, scores);
  const Var unified = fuse(tape, hs, alpha);

  EmbeddingSet out;
  out.view_labels = labels_;
  for (const auto& h : hs) out.views.push_back(tape.value(h));
  out.unified = tape.value(unified);
  const auto& a = tape.value(alpha);
  out.alpha.assign(a.data().begin(), a.data().end());
  return out;
}

EpochSamples Model::sample(const std::vector<ViewGraph>& views, std::size_t num_features, Rng& rng,
                           std::size_t max_pos, double dropout) const {
  if (dropout < 0.0 || dropout >= 1.0) throw ConfigError("dropout must be in [0, 1)");
  EpochSamples s;
  const std::size_t n = views.empty() ? 0 : views.front().num_courses();
  if (dropout > 0.0) {
    s.dropout_mask = Tensor(n, num_features);
    std::bernoulli_distribution keep(1.0 - dropout);
    const double kept = 1.0 / (1.0 - dropout);
    for (auto& m : s.dropout_mask.data()) m = keep(rng) ? kept : 0.0;
  }
  for (const auto& v : views) s.edges.push_back(sample_edges(v, rng, max_pos));
  for (std::size_t v = 0; v < views.size(); ++v) s.agreement.push_back(CorruptionPlan::sample(n, rng));
  for (std::size_t v = 0; v < views.size(); ++v) s.consistency.push_back(CorruptionPlan::sample(n, rng));
  s.alignment = CorruptionPlan::sample(n, rng);
  return s;
}

}  // namespace coursemi
