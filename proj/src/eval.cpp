#include "coursemi/eval.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <mutex>
#include <numeric>
#include <thread>

#include "coursemi/error.hpp"
#include "coursemi/io.hpp"

namespace coursemi {

SplitPlan split(const CourseLabels& labels, double ratio, std::uint64_t seed) {
  if (labels.classes.size() < 2) throw ConfigError("need at least two labelled courses to split");
  if (!(ratio > 0.0 && ratio < 1.0)) throw ConfigError("split ratio must be in (0, 1)");
  std::vector<std::size_t> ids;
  ids.reserve(labels.classes.size());
  for (const auto& [c, _] : labels.classes) ids.push_back(c);
  Rng rng(seed);
  std::shuffle(ids.begin(), ids.end(), rng);
  auto n_train = static_cast<std::size_t>(std::floor(ratio * static_cast<double>(ids.size())));
  n_train = std::clamp<std::size_t>(n_train, 1, ids.size() - 1);
  SplitPlan p;
  p.seed = seed;
  p.ratio = ratio;
  p.train.assign(ids.begin(), ids.begin() + static_cast<std::ptrdiff_t>(n_train));
  p.test.assign(ids.begin() + static_cast<std::ptrdiff_t>(n_train), ids.end());
  return p;
}

namespace {

std::vector<std::size_t> as_indices(std::span<const int> y, int num_classes) {
  std::vector<std::size_t> out;
  out.reserve(y.size());
  for (const int c : y) {
    if (c < 0 || c >= num_classes) throw ConfigError("class label " + std::to_string(c) + " out of range");
    out.push_back(static_cast<std::size_t>(c));
  }
  return out;
}

}  // namespace

Tensor SoftmaxClassifier::standardize(const Tensor& x) const {
  if (x.cols() != mean_.cols()) {
    throw ShapeError("classifier fitted on " + std::to_string(mean_.cols()) + " columns, got " +
                     std::to_string(x.cols()));
  }
  Tensor out(x.rows(), x.cols() + 1);
  for (std::size_t r = 0; r < x.rows(); ++r) {
    for (std::size_t c = 0; c < x.cols(); ++c) out(r, c) = (x(r, c) - mean_(0, c)) / scale_(0, c);
    out(r, x.cols()) = 1.0;
  }
  return out;
}

void SoftmaxClassifier::fit(const Tensor& x, std::span<const int> y, int num_classes,
                            const ClassifierOptions& opts) {
  if (x.rows() == 0 || x.rows() != y.size()) throw ConfigError("classifier needs one label per row");
  if (num_classes < 1) throw ConfigError("num_classes must be positive");
  num_classes_ = num_classes;
  const auto idx = as_indices(y, num_classes);

  mean_ = Tensor(1, x.cols());
  scale_ = Tensor(1, x.cols());
  const double n = static_cast<double>(x.rows());
  for (std::size_t c = 0; c < x.cols(); ++c) {
    double m = 0.0;
    for (std::size_t r = 0; r < x.rows(); ++r) m += x(r, c);
    m /= n;
    double var = 0.0;
    for (std::size_t r = 0; r < x.rows(); ++r) var += (x(r, c) - m) * (x(r, c) - m);
    const double sd = std::sqrt(var / n);
    mean_(0, c) = m;
    scale_(0, c) = sd > 1e-12 ? sd : 1.0;
  }

  constant_class_ = -1;
  if (std::all_of(y.begin(), y.end(), [&](int c) { return c == y.front(); })) {
    constant_class_ = y.front();
    weights_ = Tensor(x.cols() + 1, static_cast<std::size_t>(num_classes));
    return;
  }

  ParamStore store;
  Tensor w(x.cols() + 1, static_cast<std::size_t>(num_classes));
  Rng rng(opts.seed);
  std::normal_distribution<double> init(0.0, 0.01);
  for (auto& v : w.data()) v = init(rng);
  store.add("probe.weights", std::move(w));
  const Tensor xs = standardize(x);
  Optimizer opt(OptimizerKind::Adam, opts.lr, 0.0);
  for (std::size_t e = 0; e < opts.epochs; ++e) {
    Tape tape;
    const Var z = tape.matmul(tape.constant(xs), tape.param(store, "probe.weights"));
    const Var loss = tape.cross_entropy(z, idx);
    store.zero_grad();
    tape.backward(loss);
    opt.step(store);
  }
  weights_ = store.value("probe.weights");
}

Tensor SoftmaxClassifier::logits(const Tensor& x) const {
  if (num_classes_ == 0) throw ConfigError("classifier is not fitted");
  return ops::matmul(standardize(x), weights_);
}

std::vector<int> SoftmaxClassifier::predict(const Tensor& x) const {
  if (degenerate()) return std::vector<int>(x.rows(), constant_class_);
  const Tensor z = logits(x);
  std::vector<int> out(z.rows());
  for (std::size_t r = 0; r < z.rows(); ++r) {
    std::size_t best = 0;
    for (std::size_t c = 1; c < z.cols(); ++c) {
      if (z(r, c) > z(r, best)) best = c;
    }
    out[r] = static_cast<int>(best);
  }
  return out;
}

double SoftmaxClassifier::loss(const Tensor& x, std::span<const int> y) const {
  Tape tape;
  const Var z = tape.constant(logits(x));
  return tape.value(tape.cross_entropy(z, as_indices(y, num_classes_))).item();
}

Tensor SoftmaxClassifier::weight_gradient(const Tensor& x, std::span<const int> y) const {
  ParamStore store;
  store.add("probe.weights", weights_);
  Tape tape;
  const Var z = tape.matmul(tape.constant(standardize(x)), tape.param(store, "probe.weights"));
  tape.backward(tape.cross_entropy(z, as_indices(y, num_classes_)));
  return store.grad("probe.weights");
}

double accuracy(std::span<const int> y, std::span<const int> yhat) {
  if (y.empty() || y.size() != yhat.size()) throw ConfigError("accuracy needs equal, non-empty inputs");
  std::size_t hit = 0;
  for (std::size_t i = 0; i < y.size(); ++i) hit += y[i] == yhat[i];
  return static_cast<double>(hit) / static_cast<double>(y.size());
}

double macro_f1(std::span<const int> y, std::span<const int> yhat, int num_classes) {
  if (y.empty() || y.size() != yhat.size()) throw ConfigError("macro_f1 needs equal, non-empty inputs");
  const auto k = static_cast<std::size_t>(num_classes);
  std::vector<double> tp(k), fp(k), fn(k);
  std::vector<bool> seen(k);
  for (std::size_t i = 0; i < y.size(); ++i) {
    if (y[i] < 0 || y[i] >= num_classes || yhat[i] < 0 || yhat[i] >= num_classes) {
      throw ConfigError("class label out of range in macro_f1");
    }
    const auto a = static_cast<std::size_t>(y[i]);
    const auto b = static_cast<std::size_t>(yhat[i]);
    seen[a] = seen[b] = true;
    if (a == b) {
      tp[a] += 1;
    } else {
      fp[b] += 1;
      fn[a] += 1;
    }
  }
  double sum = 0.0;
  std::size_t used = 0;
  for (std::size_t c = 0; c < k; ++c) {
    if (!seen[c]) continue;
    ++used;
    const double p = tp[c] + fp[c] > 0 ? tp[c] / (tp[c] + fp[c]) : 0.0;
    const double r = tp[c] + fn[c] > 0 ? tp[c] / (tp[c] + fn[c]) : 0.0;
    sum += p + r > 0 ? 2 * p * r / (p + r) : 0.0;
  }
  return sum / static_cast<double>(used);
}

MetricsRow evaluate_embedding(const Tensor& h, const CourseLabels& labels, const EvalOptions& opts,
                              std::string setting) {
  for (const auto& [c, _] : labels.classes) {
    if (c >= h.rows()) throw ShapeError("labelled course " + std::to_string(c) + " has no embedding row");
  }
  const auto plan = split(labels, opts.split_ratio, opts.split_seed);
  const auto gather = [&](const std::vector<std::size_t>& ids, std::vector<int>& y) {
    Tensor x(ids.size(), h.cols());
    for (std::size_t i = 0; i < ids.size(); ++i) {
      for (std::size_t c = 0; c < h.cols(); ++c) x(i, c) = h(ids[i], c);
      y.push_back(labels.classes.at(ids[i]));
    }
    return x;
  };
  std::vector<int> ytr, yte;
  const Tensor xtr = gather(plan.train, ytr);
  const Tensor xte = gather(plan.test, yte);
  SoftmaxClassifier clf;
  clf.fit(xtr, ytr, CourseLabels::kNumClasses, opts.classifier);
  const auto pred = clf.predict(xte);
  MetricsRow row;
  row.setting = std::move(setting);
  row.accuracy = accuracy(yte, pred);
  row.macro_f1 = macro_f1(yte, pred, CourseLabels::kNumClasses);
  return row;
}

MetricsRow evaluate_embeddings(const EmbeddingSet& emb, const CourseLabels& labels,
                               const EvalOptions& opts, std::string setting) {
  if (!opts.concat_views) return evaluate_embedding(emb.unified, labels, opts, std::move(setting));
  std::size_t width = emb.unified.cols();
  for (const auto& v : emb.views) width += v.cols();
  Tensor h(emb.unified.rows(), width);
  for (std::size_t r = 0; r < h.rows(); ++r) {
    std::size_t off = 0;
    const auto put = [&](const Tensor& t) {
      for (std::size_t c = 0; c < t.cols(); ++c) h(r, off + c) = t(r, c);
      off += t.cols();
    };
    put(emb.unified);
    for (const auto& v : emb.views) put(v);
  }
  return evaluate_embedding(h, labels, opts, std::move(setting));
}

double median(std::vector<double> v) {
  if (v.empty()) throw ConfigError("median of an empty list");
  std::sort(v.begin(), v.end());
  const std::size_t m = v.size() / 2;
  return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

std::string subset_label(const std::vector<MetaPath>& mps) {
  std::string out;
  for (const auto& mp : mps) {
    if (!out.empty()) out += '&';
    out += mp.label;
  }
  return out;
}

namespace {

struct Setting {
  std::string name;
  std::vector<std::size_t> views;  // indices into the projected view list
  TrainConfig train;
};

// Runs every (setting, seed) cell on up to `jobs` threads and reduces each
// setting to its per-seed medians.
std::vector<MetricsRow> run_cells(const std::vector<ViewGraph>& all_views, const FeatureMatrix& x,
                                  const CourseLabels& labels, const std::vector<Setting>& settings,
                                  const AblationOptions& opts) {
  if (opts.seeds.empty()) throw ConfigError("ablation needs at least one seed");
  const std::size_t ns = opts.seeds.size();
  const std::size_t total = settings.size() * ns;
  std::vector<MetricsRow> cells(total);
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mu;

  const auto worker = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= total) return;
      {
        std::lock_guard lock(failure_mu);
        if (failure) return;
      }
      try {
        const auto& s = settings[i / ns];
        const auto seed = opts.seeds[i % ns];
        std::vector<ViewGraph> views;
        for (const auto v : s.views) views.push_back(all_views[v]);
        TrainConfig cfg = s.train;
        cfg.seed = seed;
        EvalOptions ev = opts.eval;
        ev.split_seed = seed;
        ev.classifier.seed = seed;
        const auto result = train(views, x, cfg);
        cells[i] = evaluate_embeddings(result.embeddings, labels, ev, s.name);
      } catch (...) {
        std::lock_guard lock(failure_mu);
        if (!failure) failure = std::current_exception();
      }
    }
  };

  const std::size_t jobs = std::clamp<std::size_t>(opts.jobs, 1, total);
  if (jobs == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < jobs; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  if (failure) std::rethrow_exception(failure);

  std::vector<MetricsRow> rows;
  for (std::size_t s = 0; s < settings.size(); ++s) {
    MetricsRow row;
    row.setting = settings[s].name;
    for (std::size_t k = 0; k < ns; ++k) {
      row.accuracy_runs.push_back(cells[s * ns + k].accuracy);
      row.macro_f1_runs.push_back(cells[s * ns + k].macro_f1);
    }
    row.accuracy = median(row.accuracy_runs);
    row.macro_f1 = median(row.macro_f1_runs);
    rows.push_back(std::move(row));
  }
  return rows;
}

void check_features(const HinGraph& g, const FeatureMatrix& x) {
  if (x.rows() != g.num_courses()) {
    throw ShapeError("feature rows (" + std::to_string(x.rows()) + ") != courses (" +
                     std::to_string(g.num_courses()) + ")");
  }
}

}  // namespace

std::vector<MetricsRow> ablate_metapaths(const HinGraph& g, const FeatureMatrix& x,
                                         const CourseLabels& labels, const AblationOptions& opts) {
  check_features(g, x);
  const auto& mps = opts.metapaths;
  if (mps.empty() || mps.size() > 16) throw ConfigError("meta-path ablation needs 1 to 16 meta-paths");
  const auto views = project_all(g, mps, opts.projection);

  // Singles, then pairs, ..., then the full set; lexicographic within a size.
  std::vector<Setting> settings;
  const std::size_t m = mps.size();
  for (std::size_t size = 1; size <= m; ++size) {
    std::vector<bool> pick(m, false);
    std::fill(pick.begin(), pick.begin() + static_cast<std::ptrdiff_t>(size), true);
    do {
      Setting s;
      std::vector<MetaPath> sub;
      for (std::size_t i = 0; i < m; ++i) {
        if (pick[i]) {
          s.views.push_back(i);
          sub.push_back(mps[i]);
        }
      }
      s.name = subset_label(sub);
      s.train = opts.train;
      settings.push_back(std::move(s));
    } while (std::prev_permutation(pick.begin(), pick.end()));
  }
  return run_cells(views, x, labels, settings, opts);
}

std::vector<MetricsRow> ablate_losses(const HinGraph& g, const FeatureMatrix& x,
                                      const CourseLabels& labels, const AblationOptions& opts) {
  check_features(g, x);
  const auto views = project_all(g, opts.metapaths, opts.projection);
  std::vector<std::size_t> all(views.size());
  std::iota(all.begin(), all.end(), 0);

  std::vector<std::string> variants;
  if (opts.include_base) variants.emplace_back("base");
  for (const char* v : {"J", "S", "Y", "J,S", "J,Y", "S,Y", "J,S,Y"}) variants.emplace_back(v);

  std::vector<Setting> settings;
  for (const auto& v : variants) {
    settings.push_back({v, all, loss_variant(opts.train, v == "base" ? "" : v)});
  }
  return run_cells(views, x, labels, settings, opts);
}

std::string metrics_tsv(const std::vector<MetricsRow>& rows) {
  std::string out = "setting\taccuracy\tmacro_f1\n";
  for (const auto& r : rows) {
    out += r.setting + '\t' + io::format_double(r.accuracy) + '\t' + io::format_double(r.macro_f1) + '\n';
  }
  return out;
}

std::string render_table(const std::vector<MetricsRow>& rows, const std::string& first_column) {
  std::size_t w = first_column.size();
  for (const auto& r : rows) w = std::max(w, r.setting.size());
  std::string out;
  char buf[128];
  std::snprintf(buf, sizeof buf, "%-*s  %8s  %8s\n", static_cast<int>(w), first_column.c_str(),
                "accuracy", "macro_f1");
  out += buf;
  out += std::string(w + 20, '-') + '\n';
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof buf, "%-*s  %8.4f  %8.4f\n", static_cast<int>(w), r.setting.c_str(),
                  r.accuracy, r.macro_f1);
    out += buf;
  }
  return out;
}

}  // namespace coursemi
