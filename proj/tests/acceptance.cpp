// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "coursemi/eval.hpp"
#include "coursemi/gradcheck.hpp"
#include "coursemi/synth.hpp"
#include "coursemi/trainer.hpp"
#include "oracles.hpp"

using namespace coursemi;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t) {
  return std::chrono::duration<double>(Clock::now() - t).count();
}

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

const std::vector<std::uint64_t> kSeeds{0, 1, 2, 3, 4};

// Planted instance: 300 courses, 3 classes, d = k = 16.
SynthConfig planted(std::uint64_t seed) {
  SynthConfig c;
  c.n_courses = 300;
  c.n_students = 200;
  c.n_teachers = 30;
  c.n_subjects = 9;
  c.n_classes = 3;
  c.d = 16;
  c.p_in = 0.15;
  c.p_out = 0.01;
  c.sigma_f = 0.5;
  c.seed = seed;
  return c;
}

TrainConfig planted_training() {
  TrainConfig t;
  t.embed_dim = 16;
  t.feature_dim = 16;
  t.epochs = 200;
  t.lr = 0.01;
  return t;
}

Outcome projection_oracle() {
  const auto t0 = Clock::now();
  std::mt19937_64 rng(11);
  std::size_t checked = 0;
  for (int trial = 0; trial < 200; ++trial) {
    const auto g = oracle::random_hin(rng, 50);
    for (const auto& mp : MetaPath::all()) {
      for (const bool weighted : {false, true}) {
        const auto got = project(g, mp, {weighted});
        const auto want = oracle::brute_force_paths(g, mp.intermediate, weighted);
        if (!(got == want)) {
          return {false, fmt("trial %d %s weighted=%d differs", trial, mp.label.c_str(), weighted)};
        }
        ++checked;
      }
    }
  }
  const double s = seconds_since(t0);
  return {s < 5.0, fmt("%zu projections exact, %.2fs (limit 5s)", checked, s)};
}

Outcome normalization_oracle() {
  std::mt19937_64 rng(12);
  std::uniform_int_distribution<std::size_t> size(1, 20);
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const auto a = oracle::random_symmetric(rng, size(rng), trial % 2 == 1);
    worst = std::max(worst, max_abs_diff(normalize(a), oracle::direct_normalize(a)));
  }
  bool zeros_ok = true;
  for (std::size_t n = 1; n <= 20; ++n) zeros_ok = zeros_ok && normalize(Tensor(n, n)) == Tensor::identity(n);
  return {worst <= 1e-12 && zeros_ok,
          fmt("max |diff| %.2e over 100 matrices (tol 1e-12); zeros -> I exact: %s", worst,
              zeros_ok ? "yes" : "no")};
}

// Six courses with every view holding at least one edge and one non-edge.
SynthData tiny_instance(std::uint64_t seed) {
  SynthConfig c;
  c.n_courses = 6;
  c.n_students = 4;
  c.n_teachers = 3;
  c.n_subjects = 2;
  c.n_classes = 2;
  c.d = 5;
  c.p_in = 0.7;
  c.p_out = 0.2;
  for (std::uint64_t s = seed;; ++s) {
    c.seed = s;
    auto data = generate(c);
    bool ok = true;
    for (const auto& v : project_all(data.graph, MetaPath::all())) {
      ok = ok && !v.edges.empty() && v.edges.size() < 15;
    }
    if (ok) return data;
  }
}

Outcome gradient_check() {
  const auto t0 = Clock::now();
  const auto data = tiny_instance(0);
  const auto views = project_all(data.graph, MetaPath::all());
  ModelConfig mc;
  mc.feature_dim = 5;
  mc.embed_dim = 4;
  Model model(mc, {"MP1", "MP2", "MP3"});
  Rng rng(3);
  model.init(rng);
  const auto samples = model.sample(views, 5, rng, 512, 0.0);
  const auto report = check_gradients(model, views, data.features, samples, LossWeights{}, {1e-5, 1e-4});
  const double s = seconds_since(t0);
  std::string worst;
  double w = -1;
  for (const auto& p : report.params) {
    if (p.max_rel_error > w) {
      w = p.max_rel_error;
      worst = p.name;
    }
  }
  return {report.pass && s < 30.0,
          fmt("%zu tensors, max rel err %.2e at %s (tol 1e-4), %.2fs", report.params.size(),
              report.max_rel_error, worst.c_str(), s)};
}

Outcome loss_landmarks() {
  const auto data = tiny_instance(0);
  const auto views = project_all(data.graph, MetaPath::all());
  ModelConfig mc;
  mc.feature_dim = 5;
  mc.embed_dim = 4;
  Model model(mc, {"MP1", "MP2", "MP3"});
  Rng rng(4);
  model.init(rng);
  for (auto& s : model.params().slots()) {
    for (auto& v : s.value.data()) v = 0.0;
  }
  const auto samples = model.sample(views, 5, rng, 512, 0.0);
  const auto l = model.evaluate(views, data.features, samples, LossWeights{});
  const double chance = 2.0 * std::numbers::ln2;
  const double dev = std::max({std::abs(l.q - chance), std::abs(l.j - chance), std::abs(l.s - chance),
                               std::abs(l.y - chance)});
  return {dev <= 1e-9, fmt("L_q %.12f L_j %.12f L_s %.12f L_y %.12f vs 2ln2; max dev %.1e (tol 1e-9)",
                           l.q, l.j, l.s, l.y, dev)};
}

Outcome descent() {
  const auto t0 = Clock::now();
  int ok = 0;
  std::string detail;
  for (const auto seed : kSeeds) {
    SynthConfig c = planted(seed);
    c.n_courses = 30;
    c.n_students = 20;
    c.n_teachers = 6;
    c.n_subjects = 3;
    const auto data = generate(c);
    TrainConfig t;
    t.embed_dim = 16;
    t.feature_dim = 16;
    t.epochs = 200;
    t.seed = seed;
    const auto r = train(data.graph, data.features, MetaPath::all(), t);
    const auto& e = r.report.epochs;
    double tail = 0.0;
    for (std::size_t i = e.size() - 10; i < e.size(); ++i) tail += e[i].losses.total;
    tail /= 10.0;
    ok += tail < e.front().losses.total;
    detail += fmt(" %.3f->%.3f", e.front().losses.total, tail);
  }
  const double s = seconds_since(t0);
  return {ok == 5 && s < 60.0, fmt("%d/5 seeds descend (epoch1->last10 mean:%s), %.1fs", ok, detail.c_str(), s)};
}

Outcome planted_recovery() {
  std::vector<double> acc, f1, ctl;
  double slowest = 0.0;
  for (const auto seed : kSeeds) {
    auto t = planted_training();
    t.seed = seed;
    EvalOptions ev;
    ev.split_seed = seed;
    ev.classifier.seed = seed;
    {
      const auto t0 = Clock::now();
      const auto data = generate(planted(seed));
      const auto r = train(data.graph, data.features, MetaPath::all(), t);
      const auto m = evaluate_embeddings(r.embeddings, data.labels, ev);
      slowest = std::max(slowest, seconds_since(t0));
      acc.push_back(m.accuracy);
      f1.push_back(m.macro_f1);
    }
    {
      // No class signal anywhere: links at the density-matched rate, features pure noise.
      SynthConfig c = planted(seed);
      for (const auto& mp : MetaPath::all()) c = make_noise_view_config(c, mp);
      c.feature_signal = 0.0;
      const auto t0 = Clock::now();
      const auto data = generate(c);
      const auto r = train(data.graph, data.features, MetaPath::all(), t);
      ctl.push_back(evaluate_embeddings(r.embeddings, data.labels, ev).accuracy);
      slowest = std::max(slowest, seconds_since(t0));
    }
  }
  const double ma = median(acc), mf = median(f1), mc = median(ctl);
  const bool pass = ma >= 0.80 && mf >= 0.75 && std::abs(mc - 1.0 / 3.0) <= 0.10 && slowest < 120.0;
  return {pass, fmt("median acc %.4f (>=0.80), macro-F1 %.4f (>=0.75); control acc %.4f (1/3 +- 0.10); "
                    "slowest run %.1fs",
                    ma, mf, mc, slowest)};
}

AblationOptions planted_ablation() {
  AblationOptions ab;
  ab.train = planted_training();
  ab.seeds = kSeeds;
  return ab;
}

Outcome metapath_trend() {
  const auto data = generate(planted(0));
  const auto rows = ablate_metapaths(data.graph, data.features, data.labels, planted_ablation());
  const auto& all = rows.back();
  bool pass = all.setting == "MP1&MP2&MP3" && rows.size() == 7;
  std::string detail = fmt("%s %.4f vs", all.setting.c_str(), all.accuracy);
  for (std::size_t i = 0; i < 3; ++i) {
    pass = pass && all.accuracy >= rows[i].accuracy;
    detail += fmt(" %s %.4f", rows[i].setting.c_str(), rows[i].accuracy);
  }
  return {pass, detail + " (median accuracy, all >= each single)"};
}

Outcome attention_trend() {
  const auto data = generate(make_noise_view_config(planted(0), MetaPath::mp2()));
  std::vector<std::vector<double>> alpha(3);
  for (const auto seed : kSeeds) {
    auto t = planted_training();
    t.seed = seed;
    const auto r = train(data.graph, data.features, MetaPath::all(), t);
    for (std::size_t v = 0; v < 3; ++v) alpha[v].push_back(r.embeddings.alpha[v]);
  }
  const double a1 = median(alpha[0]), a2 = median(alpha[1]), a3 = median(alpha[2]);
  return {a1 > a2 && a3 > a2,
          fmt("noise view MP2: median alpha MP1 %.4f, MP2 %.4f, MP3 %.4f (planted > noise)", a1, a2, a3)};
}

Outcome loss_trend() {
  const auto data = generate(planted(0));
  auto ab = planted_ablation();
  ab.include_base = true;
  const auto rows = ablate_losses(data.graph, data.features, data.labels, ab);
  const auto& base = rows.front();
  const auto& full = rows.back();
  const bool pass = base.setting == "base" && full.setting == "J,S,Y" &&
                    full.accuracy >= base.accuracy && full.macro_f1 >= base.macro_f1;
  return {pass, fmt("median full J,S,Y acc %.4f / F1 %.4f vs base acc %.4f / F1 %.4f (full >= base)",
                    full.accuracy, full.macro_f1, base.accuracy, base.macro_f1)};
}

Outcome determinism() {
  SynthConfig c = planted(5);
  c.n_courses = 40;
  c.n_students = 30;
  c.n_teachers = 8;
  c.n_subjects = 4;
  const auto data = generate(c);
  TrainConfig t;
  t.embed_dim = 8;
  t.feature_dim = 16;
  t.epochs = 30;
  t.seed = 7;
  const auto views = project_all(data.graph, MetaPath::all());
  const auto a = train(views, data.features, t);
  const auto b = train(views, data.features, t);
  const bool logs_equal = a.report.log_tsv() == b.report.log_tsv();

  const auto path = (std::filesystem::temp_directory_path() / "coursemi_accept.ckpt").string();
  a.model.params().save(path);
  Model restored(t.model_config(), a.model.view_labels());
  restored.params().load(path);
  std::filesystem::remove(path);
  Model original = a.model;
  Rng r1(99), r2(99);
  const auto s1 = original.sample(views, 16, r1, 512, 0.0);
  const auto s2 = restored.sample(views, 16, r2, 512, 0.0);
  const auto l1 = original.evaluate(views, data.features, s1, t.lambda);
  const auto l2 = restored.evaluate(views, data.features, s2, t.lambda);
  const double dev = std::max({std::abs(l1.q - l2.q), std::abs(l1.j - l2.j), std::abs(l1.s - l2.s),
                               std::abs(l1.y - l2.y), std::abs(l1.total - l2.total)});
  return {logs_equal && dev <= 1e-12,
          fmt("identical logs: %s; checkpoint round-trip loss dev %.1e (tol 1e-12)",
              logs_equal ? "yes" : "no", dev)};
}

struct MetricFixture {
  std::vector<int> y, yhat;
  int k;
  double acc, f1;
};

Outcome metric_oracles() {
  // Expected values computed by hand from each confusion matrix.
  const std::vector<MetricFixture> fx{
      {{0, 0, 1, 1}, {0, 1, 1, 1}, 2, 3.0 / 4.0, 11.0 / 15.0},
      {{0, 1, 2}, {0, 1, 2}, 3, 1.0, 1.0},
      {{0, 0, 0, 0}, {1, 1, 1, 1}, 2, 0.0, 0.0},
      {{0, 1, 0, 1}, {1, 0, 1, 0}, 2, 0.0, 0.0},
      {{0, 0, 1, 1, 2, 2}, {0, 0, 1, 2, 2, 1}, 3, 2.0 / 3.0, 2.0 / 3.0},
      {{0, 0, 0, 1}, {0, 0, 0, 0}, 2, 3.0 / 4.0, 3.0 / 7.0},
      {{3, 3, 3}, {3, 3, 3}, 6, 1.0, 1.0},
      {{0, 1, 2, 3, 4, 5}, {0, 1, 2, 3, 4, 5}, 6, 1.0, 1.0},
      {{0, 1, 2, 3, 4, 5}, {1, 2, 3, 4, 5, 0}, 6, 0.0, 0.0},
      {{2, 2, 2, 5, 5}, {2, 5, 2, 5, 2}, 6, 3.0 / 5.0, 7.0 / 12.0},
      {{0, 0, 1, 1, 1, 2}, {0, 2, 1, 1, 0, 2}, 3, 2.0 / 3.0, 59.0 / 90.0},
      {{1, 1, 1, 1, 1, 0}, {1, 1, 1, 1, 1, 1}, 2, 5.0 / 6.0, 5.0 / 11.0},
      {{0, 1}, {1, 1}, 2, 1.0 / 2.0, 1.0 / 3.0},
      {{4, 4, 0, 0, 0, 0, 1}, {4, 0, 0, 0, 1, 0, 1}, 6, 5.0 / 7.0, 25.0 / 36.0},
      {{0, 1, 2, 0, 1, 2, 0, 1, 2}, {0, 2, 1, 0, 1, 2, 1, 1, 2}, 3, 2.0 / 3.0, 214.0 / 315.0},
      {{5, 4, 3, 2, 1, 0, 5, 4}, {5, 4, 3, 2, 1, 0, 0, 0}, 6, 3.0 / 4.0, 29.0 / 36.0},
      {{0, 0, 0, 0, 0, 1, 1, 1, 2, 2}, {0, 0, 0, 1, 2, 1, 1, 0, 2, 2}, 3, 7.0 / 10.0, 32.0 / 45.0},
      {{1, 2, 1, 2, 1, 2}, {2, 2, 2, 2, 2, 2}, 3, 1.0 / 2.0, 1.0 / 3.0},
      {{0, 3, 3, 0}, {3, 3, 0, 0}, 6, 1.0 / 2.0, 1.0 / 2.0},
      {{2, 0, 1, 2, 0, 1, 2}, {2, 0, 0, 2, 1, 1, 1}, 3, 4.0 / 7.0, 17.0 / 30.0},
  };
  double worst = 0.0;
  for (const auto& f : fx) {
    worst = std::max(worst, std::abs(accuracy(f.y, f.yhat) - f.acc));
    worst = std::max(worst, std::abs(macro_f1(f.y, f.yhat, f.k) - f.f1));
    worst = std::max(worst, std::abs(oracle::confusion_macro_f1(f.y, f.yhat, f.k) - f.f1));
  }
  return {worst <= 1e-9 && fx.size() == 20,
          fmt("%zu fixtures, max |diff| %.1e (tol 1e-9); worked example acc %.4f macro-F1 %.4f", fx.size(),
              worst, accuracy(fx[0].y, fx[0].yhat), macro_f1(fx[0].y, fx[0].yhat, 2))};
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
      {"projection oracle", projection_oracle},
      {"normalization", normalization_oracle},
      {"gradient check", gradient_check},
      {"loss landmarks", loss_landmarks},
      {"descent", descent},
      {"planted recovery", planted_recovery},
      {"meta-path combination trend", metapath_trend},
      {"attention noise-view trend", attention_trend},
      {"loss-ablation trend", loss_trend},
      {"determinism and checkpoint round-trip", determinism},
      {"metric oracles", metric_oracles},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("threw: ") + e.what()};
    }
    failed += !o.pass;
    std::printf("%s %2zu %s: %s\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first, o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%zu/%zu criteria passed\n", criteria.size() - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
