#include <doctest.h>

#include <cmath>
#include <random>
#include <set>

#include "coursemi/error.hpp"
#include "coursemi/eval.hpp"
#include "coursemi/synth.hpp"
#include "oracles.hpp"

using namespace coursemi;

namespace {

CourseLabels labels_of(const std::vector<int>& y) {
  CourseLabels l;
  for (std::size_t i = 0; i < y.size(); ++i) l.classes[i] = y[i];
  return l;
}

}  // namespace

TEST_CASE("split sizes, disjointness and determinism") {
  const auto l = labels_of({0, 1, 2, 0, 1, 2, 0, 1, 2, 0});
  const auto s = split(l, 0.8, 3);
  CHECK(s.train.size() == 8);
  CHECK(s.test.size() == 2);
  std::set<std::size_t> all(s.train.begin(), s.train.end());
  all.insert(s.test.begin(), s.test.end());
  CHECK(all.size() == 10);
  CHECK(split(l, 0.8, 3).train == s.train);
  CHECK(split(l, 0.8, 4).train != s.train);
  CHECK(split(labels_of({0, 1}), 0.8, 0).test.size() == 1);
  CHECK_THROWS_AS(split(labels_of({0}), 0.8, 0), ConfigError);
  CHECK_THROWS_AS(split(l, 1.0, 0), ConfigError);
}

TEST_CASE("accuracy and macro F1 hand values") {
  const std::vector<int> y{0, 0, 1, 1, 2, 2};
  CHECK(accuracy(y, y) == 1.0);
  CHECK(macro_f1(y, y, 3) == 1.0);
  const std::vector<int> yhat{0, 1, 1, 1, 2, 0};
  CHECK(accuracy(y, yhat) == doctest::Approx(4.0 / 6));
  // class 0: P 1/2 R 1/2; class 1: P 2/3 R 1; class 2: P 1 R 1/2
  const double want = (0.5 + 0.8 + 2.0 / 3) / 3;
  CHECK(macro_f1(y, yhat, 3) == doctest::Approx(want).epsilon(1e-14));
  CHECK_THROWS_AS(accuracy(std::vector<int>{}, std::vector<int>{}), ConfigError);
  CHECK_THROWS_AS(accuracy(y, std::vector<int>{0}), ConfigError);
}

TEST_CASE("macro F1 matches the confusion-matrix oracle") {
  std::mt19937_64 rng(1);
  std::uniform_int_distribution<int> cls(0, 4);
  for (int t = 0; t < 50; ++t) {
    std::vector<int> y(30), yhat(30);
    for (auto& v : y) v = cls(rng);
    for (auto& v : yhat) v = cls(rng);
    CHECK(std::abs(macro_f1(y, yhat, 5) - oracle::confusion_macro_f1(y, yhat, 5)) < 1e-12);
  }
}

TEST_CASE("separable embeddings classify perfectly") {
  std::mt19937_64 rng(2);
  std::normal_distribution<double> nd(0, 0.1);
  std::vector<int> y;
  Tensor h(60, 3);
  for (std::size_t i = 0; i < 60; ++i) {
    const int c = static_cast<int>(i % 3);
    y.push_back(c);
    for (std::size_t k = 0; k < 3; ++k) h(i, k) = (k == static_cast<std::size_t>(c) ? 3.0 : 0.0) + nd(rng);
  }
  const auto row = evaluate_embedding(h, labels_of(y), {});
  CHECK(row.accuracy == 1.0);
  CHECK(row.macro_f1 == 1.0);
}

TEST_CASE("identical embeddings predict the training majority") {
  std::vector<int> y;
  for (int i = 0; i < 50; ++i) y.push_back(i < 30 ? 1 : (i < 40 ? 0 : 2));
  const Tensor h(50, 4, 0.7);
  EvalOptions opts;
  const auto s = split(labels_of(y), opts.split_ratio, opts.split_seed);
  std::vector<int> ytr, yte;
  for (const auto i : s.train) ytr.push_back(y[i]);
  for (const auto i : s.test) yte.push_back(y[i]);
  int majority = 0, best = -1;
  for (int c = 0; c < 3; ++c) {
    const int n = static_cast<int>(std::count(ytr.begin(), ytr.end(), c));
    if (n > best) best = n, majority = c;
  }
  const double want = static_cast<double>(std::count(yte.begin(), yte.end(), majority)) / yte.size();
  CHECK(evaluate_embedding(h, labels_of(y), opts).accuracy == doctest::Approx(want));
}

TEST_CASE("classifier gradient matches finite differences") {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> nd;
  Tensor x(12, 3);
  for (auto& v : x.data()) v = nd(rng);
  const std::vector<int> y{0, 1, 2, 0, 1, 2, 0, 1, 2, 0, 1, 2};
  SoftmaxClassifier clf;
  clf.fit(x, y, 3, {5, 0.01, 0});
  const auto g = clf.weight_gradient(x, y);
  const double eps = 1e-6;
  for (std::size_t k = 0; k < clf.weights().size(); ++k) {
    auto& w = clf.weights().data()[k];
    const double orig = w;
    w = orig + eps;
    const double up = clf.loss(x, y);
    w = orig - eps;
    const double down = clf.loss(x, y);
    w = orig;
    const double num = (up - down) / (2 * eps);
    CHECK(std::abs(g.data()[k] - num) <= 1e-6 * std::max(1.0, std::abs(num)));
  }
}

TEST_CASE("single-class training gives a constant predictor") {
  SoftmaxClassifier clf;
  const std::vector<int> y{2, 2, 2};
  clf.fit(Tensor{{1, 0}, {0, 1}, {1, 1}}, y, 3);
  CHECK(clf.degenerate());
  CHECK(clf.predict(Tensor{{5, 5}, {-1, 0}}) == std::vector<int>{2, 2});
}

TEST_CASE("median") {
  CHECK(median({3, 1, 2}) == 2.0);
  CHECK(median({4, 1, 2, 3}) == 2.5);
  CHECK_THROWS(median({}));
}

TEST_CASE("ablation rows and report formats") {
  SynthConfig sc;
  sc.n_courses = 30;
  sc.n_students = 30;
  sc.n_teachers = 8;
  sc.n_subjects = 4;
  sc.d = 4;
  sc.p_in = 0.4;
  const auto data = generate(sc);
  AblationOptions opts;
  opts.train.epochs = 3;
  opts.train.embed_dim = 4;
  opts.train.feature_dim = 4;
  opts.seeds = {0, 1};
  opts.eval.classifier.epochs = 20;
  opts.jobs = 2;
  const auto mp = ablate_metapaths(data.graph, data.features, data.labels, opts);
  REQUIRE(mp.size() == 7);
  const char* want[] = {"MP1", "MP2", "MP3", "MP1&MP2", "MP1&MP3", "MP2&MP3", "MP1&MP2&MP3"};
  for (std::size_t i = 0; i < 7; ++i) {
    CHECK(mp[i].setting == want[i]);
    CHECK(mp[i].accuracy_runs.size() == 2);
    CHECK(mp[i].accuracy == median(mp[i].accuracy_runs));
  }
  opts.include_base = true;
  opts.jobs = 1;
  const auto ls = ablate_losses(data.graph, data.features, data.labels, opts);
  REQUIRE(ls.size() == 8);
  CHECK(ls[0].setting == "base");
  CHECK(ls[7].setting == "J,S,Y");
  CHECK(metrics_tsv(ls).starts_with("setting\taccuracy\tmacro_f1\nbase\t"));
  CHECK(render_table(mp, "metapaths").find("MP1&MP2&MP3") != std::string::npos);
  // Thread count does not change results.
  opts.jobs = 3;
  const auto ls3 = ablate_losses(data.graph, data.features, data.labels, opts);
  for (std::size_t i = 0; i < ls.size(); ++i) CHECK(ls3[i].accuracy_runs == ls[i].accuracy_runs);
}
