#include "coursemi/trainer.hpp"

#include <chrono>
#include <cmath>
#include <sstream>

#include "coursemi/error.hpp"
#include "coursemi/io.hpp"

namespace coursemi {

void TrainConfig::validate() const {
  const double ls[] = {lambda.q, lambda.j, lambda.s, lambda.y};
  bool any = false;
  for (const double l : ls) {
    if (!(l >= 0.0) || !std::isfinite(l)) throw ConfigError("loss weights must be finite and >= 0");
    any = any || l > 0.0;
  }
  if (!any) throw ConfigError("at least one loss weight must be positive");
  if (!(lr > 0.0)) throw ConfigError("lr must be > 0");
  if (!(weight_decay >= 0.0)) throw ConfigError("weight_decay must be >= 0");
  if (!(dropout >= 0.0 && dropout < 1.0)) throw ConfigError("dropout must be in [0, 1)");
  if (embed_dim == 0 || feature_dim == 0) throw ConfigError("dimensions must be positive");
  if (encoder_depth == 0) throw ConfigError("encoder_depth must be >= 1");
}

ModelConfig TrainConfig::model_config() const {
  ModelConfig m;
  m.feature_dim = feature_dim;
  m.embed_dim = embed_dim;
  m.attention_dim = attention_dim;
  m.encoder_depth = encoder_depth;
  m.share_encoder = share_encoder;
  m.share_agreement_discriminator = share_agreement_discriminator;
  m.pooling = pooling;
  return m;
}

std::string TrainConfig::echo() const {
  std::ostringstream o;
  o << "lambda_q = " << io::format_double(lambda.q) << '\n'
    << "lambda_j = " << io::format_double(lambda.j) << '\n'
    << "lambda_s = " << io::format_double(lambda.s) << '\n'
    << "lambda_y = " << io::format_double(lambda.y) << '\n'
    << "epochs = " << epochs << '\n'
    << "lr = " << io::format_double(lr) << '\n'
    << "weight_decay = " << io::format_double(weight_decay) << '\n'
    << "dropout = " << io::format_double(dropout) << '\n'
    << "embed_dim = " << embed_dim << '\n'
    << "feature_dim = " << feature_dim << '\n'
    << "attention_dim = " << attention_dim << '\n'
    << "encoder_depth = " << encoder_depth << '\n'
    << "seed = " << seed << '\n'
    << "max_pos = " << max_pos << '\n'
    << "checkpoint_interval = " << checkpoint_interval << '\n'
    << "optimizer = " << (optimizer == OptimizerKind::Adam ? "adam" : "sgd") << '\n'
    << "share_encoder = " << (share_encoder ? "true" : "false") << '\n'
    << "share_agreement_discriminator = " << (share_agreement_discriminator ? "true" : "false")
    << '\n'
    << "attention_pooling = " << to_string(pooling) << '\n';
  return o.str();
}

TrainConfig loss_variant(TrainConfig cfg, std::string_view variant) {
  bool j = false;
  bool s = false;
  bool y = false;
  for (const char c : variant) {
    switch (c) {
      case 'J': case 'j': j = true; break;
      case 'S': case 's': s = true; break;
      case 'Y': case 'y': y = true; break;
      case ',': case ' ': case '{': case '}': break;
      default: throw ConfigError("unknown loss term '" + std::string(1, c) + "' in variant");
    }
  }
  if (!j) cfg.lambda.j = 0.0;
  if (!s) cfg.lambda.s = 0.0;
  if (!y) cfg.lambda.y = 0.0;
  return cfg;
}

std::string TrainReport::log_tsv() const {
  std::string out = "epoch\tL_q\tL_j\tL_s\tL_y\ttotal\n";
  for (const auto& e : epochs) {
    out += std::to_string(e.epoch);
    for (const double v : {e.losses.q, e.losses.j, e.losses.s, e.losses.y, e.losses.total}) {
      out += '\t';
      out += io::format_double(v);
    }
    out += '\n';
  }
  return out;
}

std::string TrainReport::attention_tsv() const {
  std::string out = "metapath\talpha\n";
  for (std::size_t v = 0; v < view_labels.size() && v < alpha.size(); ++v) {
    out += view_labels[v] + '\t' + io::format_double(alpha[v]) + '\n';
  }
  return out;
}

Optimizer::Optimizer(OptimizerKind kind, double lr, double weight_decay, double beta1,
                     double beta2, double eps)
    : kind_(kind), lr_(lr), wd_(weight_decay), beta1_(beta1), beta2_(beta2), eps_(eps) {}

void Optimizer::step(ParamStore& params) {
  if (m_.empty()) {
    for (const auto& s : params.slots()) {
      m_.emplace_back(s.value.rows(), s.value.cols());
      v_.emplace_back(s.value.rows(), s.value.cols());
    }
  }
  ++t_;
  const double bc1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
  const double bc2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
  for (std::size_t i = 0; i < params.size(); ++i) {
    auto& slot = params.slot(i);
    if (!slot.trainable) continue;
    auto w = slot.value.data();
    auto g = slot.grad.data();
    if (kind_ == OptimizerKind::Sgd) {
      for (std::size_t k = 0; k < w.size(); ++k) w[k] -= lr_ * (g[k] + wd_ * w[k]);
      continue;
    }
    auto m = m_[i].data();
    auto v = v_[i].data();
    for (std::size_t k = 0; k < w.size(); ++k) {
      m[k] = beta1_ * m[k] + (1.0 - beta1_) * g[k];
      v[k] = beta2_ * v[k] + (1.0 - beta2_) * g[k] * g[k];
      const double mhat = m[k] / bc1;
      const double vhat = v[k] / bc2;
      w[k] -= lr_ * (mhat / (std::sqrt(vhat) + eps_) + wd_ * w[k]);
    }
  }
}

TrainResult train(const std::vector<ViewGraph>& views, const FeatureMatrix& x,
                  const TrainConfig& cfg, const TrainHooks& hooks) {
  cfg.validate();
  if (views.empty()) throw ConfigError("training needs at least one meta-path view");
  const auto start = std::chrono::steady_clock::now();

  std::vector<std::string> labels;
  for (const auto& v : views) labels.push_back(v.metapath.label);
  Model model(cfg.model_config(), labels);
  Rng rng(cfg.seed);
  model.init(rng);

  Optimizer opt(cfg.optimizer, cfg.lr, cfg.weight_decay);
  TrainReport report;
  report.seed = cfg.seed;
  report.config_echo = cfg.echo();
  report.view_labels = labels;

  ParamStore last_good = model.params();
  for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
    const auto samples = model.sample(views, x.cols(), rng, cfg.max_pos, cfg.dropout);
    EpochLosses row;
    row.epoch = epoch;
    try {
      Tape tape;
      const auto g = model.forward(tape, views, x, samples, cfg.lambda);
      row.losses = {tape.value(g.q).item(), tape.value(g.j).item(), tape.value(g.s).item(),
                    tape.value(g.y).item(), tape.value(g.total).item()};
      if (!std::isfinite(row.losses.total)) throw NumericFault("non-finite loss");
      last_good = model.params();
      model.params().zero_grad();
      tape.backward(g.total);
      for (const auto& s : model.params().slots()) {
        if (!s.grad.all_finite()) throw NumericFault("non-finite gradient for '" + s.name + "'");
      }
      opt.step(model.params());
    } catch (const NumericFault& e) {
      if (!hooks.checkpoint_path.empty()) last_good.save(hooks.checkpoint_path);
      throw NumericFault("epoch " + std::to_string(epoch) + ": " + e.what());
    }
    report.epochs.push_back(row);
    if (hooks.on_epoch) hooks.on_epoch(row);
    if (!hooks.checkpoint_path.empty() && cfg.checkpoint_interval > 0 &&
        epoch % cfg.checkpoint_interval == 0) {
      model.params().save(hooks.checkpoint_path);
    }
  }

  auto embeddings = model.embed(views, x);
  report.alpha = embeddings.alpha;
  report.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return {std::move(model), std::move(embeddings), std::move(report)};
}

TrainResult train(const HinGraph& g, const FeatureMatrix& x, const std::vector<MetaPath>& mps,
                  const TrainConfig& cfg, const ProjectionOptions& proj, const TrainHooks& hooks) {
  if (x.rows() != g.num_courses()) {
    throw ShapeError("feature rows (" + std::to_string(x.rows()) + ") != courses (" +
                     std::to_string(g.num_courses()) + ")");
  }
  return train(project_all(g, mps, proj), x, cfg, hooks);
}

}  // namespace coursemi
