#include <doctest.h>

#include <cmath>
#include <filesystem>

#include "coursemi/error.hpp"
#include "coursemi/synth.hpp"
#include "coursemi/trainer.hpp"
#include "test_util.hpp"

using namespace coursemi;

namespace {

SynthData tiny() {
  SynthConfig c;
  c.n_courses = 20;
  c.n_students = 20;
  c.n_teachers = 6;
  c.n_subjects = 3;
  c.d = 4;
  c.p_in = 0.4;
  return generate(c);
}

TrainConfig small_cfg() {
  TrainConfig t;
  t.feature_dim = 4;
  t.embed_dim = 3;
  t.epochs = 5;
  return t;
}

}  // namespace

TEST_CASE("loss variants") {
  const auto j = loss_variant(TrainConfig{}, "J");
  CHECK(j.lambda.q == 1.0);
  CHECK(j.lambda.j == 1.0);
  CHECK(j.lambda.s == 0.0);
  CHECK(j.lambda.y == 0.0);
  const auto sy = loss_variant(TrainConfig{}, "{S,Y}");
  CHECK(sy.lambda.j == 0.0);
  CHECK(sy.lambda.s == 1.0);
  CHECK(sy.lambda.y == 1.0);
  const auto base = loss_variant(TrainConfig{}, "");
  CHECK(base.lambda.j + base.lambda.s + base.lambda.y == 0.0);
  CHECK_THROWS_AS(loss_variant(TrainConfig{}, "Q"), ConfigError);
}

TEST_CASE("validation") {
  auto c = small_cfg();
  c.lambda = {0, 0, 0, 0};
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = small_cfg();
  c.lambda.s = -1;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = small_cfg();
  c.lr = 0;
  CHECK_THROWS_AS(c.validate(), ConfigError);
}

TEST_CASE("optimizer with zero learning rate leaves parameters unchanged") {
  ParamStore ps;
  ps.add("w", Tensor{{1, -2}, {3, 4}});
  ps.slot(0).grad = Tensor{{0.5, 0.5}, {-1, 2}};
  for (const auto kind : {OptimizerKind::Adam, OptimizerKind::Sgd}) {
    Optimizer opt(kind, 0.0, 0.01);
    opt.step(ps);
    CHECK(ps.value("w") == Tensor{{1, -2}, {3, 4}});
  }
  Optimizer sgd(OptimizerKind::Sgd, 0.1, 0.0);
  sgd.step(ps);
  CHECK(max_abs_diff(ps.value("w"), Tensor{{0.95, -2.05}, {3.1, 3.8}}) < 1e-15);
}

TEST_CASE("zero epochs returns the initial model") {
  const auto data = tiny();
  auto c = small_cfg();
  c.epochs = 0;
  const auto r = train(data.graph, data.features, MetaPath::all(), c);
  CHECK(r.report.epochs.empty());
  Model m(c.model_config(), {"MP1", "MP2", "MP3"});
  Rng rng(c.seed);
  m.init(rng);
  for (std::size_t i = 0; i < m.params().size(); ++i) {
    CHECK(m.params().slot(i).value == r.model.params().slot(i).value);
  }
}

TEST_CASE("training is deterministic and logs every epoch") {
  const auto data = tiny();
  const auto a = train(data.graph, data.features, MetaPath::all(), small_cfg());
  const auto b = train(data.graph, data.features, MetaPath::all(), small_cfg());
  CHECK(a.report.log_tsv() == b.report.log_tsv());
  CHECK(a.embeddings.unified == b.embeddings.unified);
  CHECK(a.report.epochs.size() == 5);
  CHECK(a.report.log_tsv().starts_with("epoch\tL_q\tL_j\tL_s\tL_y\ttotal\n1\t"));
  CHECK(a.report.attention_tsv().starts_with("metapath\talpha\nMP1\t"));
  for (const auto& e : a.report.epochs) {
    CHECK(std::abs(e.losses.total - total_loss(e.losses, small_cfg().lambda)) < 1e-12);
  }
  auto other = small_cfg();
  other.seed = 1;
  CHECK(train(data.graph, data.features, MetaPath::all(), other).report.log_tsv() != a.report.log_tsv());
}

TEST_CASE("loss decreases over training") {
  const auto data = tiny();
  auto c = small_cfg();
  c.epochs = 150;
  c.lr = 0.01;
  c.dropout = 0;
  const auto r = train(data.graph, data.features, MetaPath::all(), c);
  CHECK(r.report.epochs.back().losses.total < r.report.epochs.front().losses.total);
}

TEST_CASE("numeric faults save the last good parameters") {
  const auto data = tiny();
  auto c = small_cfg();
  c.lr = 1e300;
  c.optimizer = OptimizerKind::Sgd;
  c.weight_decay = 0;
  TempDir d;
  TrainHooks hooks;
  hooks.checkpoint_path = d.file("fault.ckpt");
  CHECK_THROWS_AS(train(data.graph, data.features, MetaPath::all(), c, {}, hooks), NumericFault);
  CHECK(std::filesystem::exists(hooks.checkpoint_path));
  ParamStore ps = Model(c.model_config(), {"MP1", "MP2", "MP3"}).params();
  ps.load(hooks.checkpoint_path);
  for (const auto& s : ps.slots()) CHECK(s.value.all_finite());
}

TEST_CASE("periodic checkpoints") {
  const auto data = tiny();
  auto c = small_cfg();
  c.checkpoint_interval = 2;
  TempDir d;
  TrainHooks hooks;
  hooks.checkpoint_path = d.file("p.ckpt");
  std::size_t seen = 0;
  hooks.on_epoch = [&](const EpochLosses& e) { CHECK(e.epoch == ++seen); };
  train(data.graph, data.features, MetaPath::all(), c, {}, hooks);
  CHECK(seen == 5);
  CHECK(std::filesystem::exists(hooks.checkpoint_path));
}

TEST_CASE("feature rows must match courses") {
  const auto data = tiny();
  CHECK_THROWS_AS(train(data.graph, Tensor(3, 4), MetaPath::all(), small_cfg()), ShapeError);
  CHECK_THROWS_AS(train(std::vector<ViewGraph>{}, data.features, small_cfg()), ConfigError);
}
