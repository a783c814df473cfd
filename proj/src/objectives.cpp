#include "coursemi/objectives.hpp"

#include <algorithm>
#include <numeric>

#include "coursemi/error.hpp"

namespace coursemi {

CorruptionPlan CorruptionPlan::identity(std::size_t n) {
  CorruptionPlan p;
  p.permutation.resize(n);
  std::iota(p.permutation.begin(), p.permutation.end(), std::size_t{0});
  return p;
}

CorruptionPlan CorruptionPlan::sample(std::size_t n, Rng& rng) {
  CorruptionPlan p = identity(n);
  p.seed = rng();
  Rng local(p.seed);
  do {
    std::shuffle(p.permutation.begin(), p.permutation.end(), local);
  } while (n > 1 && p.is_identity());
  return p;
}

CorruptionPlan CorruptionPlan::from_seed(std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  return sample(n, rng);
}

bool CorruptionPlan::is_identity() const {
  for (std::size_t i = 0; i < permutation.size(); ++i) {
    if (permutation[i] != i) return false;
  }
  return true;
}

Tensor corrupt_rows(const Tensor& t, const CorruptionPlan& plan) {
  if (plan.permutation.size() != t.rows()) {
    throw ShapeError("corruption plan of length " + std::to_string(plan.permutation.size()) +
                     " for " + std::to_string(t.rows()) + " rows");
  }
  return ops::gather_rows(t, plan.permutation);
}

Var bilinear_logits(Tape& tape, Var left, Var weight, Var right) {
  return tape.row_sum(tape.hadamard(tape.matmul(left, weight), right));
}

std::vector<double> BilinearDiscriminator::score(const Tensor& left, const Tensor& right) const {
  Tape tape;
  const Var s = tape.sigmoid(
      bilinear_logits(tape, tape.constant(left), tape.constant(weight), tape.constant(right)));
  const auto& v = tape.value(s);
  return {v.data().begin(), v.data().end()};
}

namespace {

void check_plan(const CorruptionPlan& plan, std::size_t rows) {
  if (plan.permutation.size() != rows) {
    throw ShapeError("corruption plan length " + std::to_string(plan.permutation.size()) +
                     " != " + std::to_string(rows));
  }
}

}  // namespace

Var agreement_loss(Tape& tape, Var x, Var h, const std::vector<Var>& discriminators,
                   const std::vector<CorruptionPlan>& plans) {
  if (discriminators.empty() || discriminators.size() != plans.size()) {
    throw ShapeError("agreement_loss needs one discriminator and plan per view");
  }
  const std::size_t n = tape.value(h).rows();
  std::optional<Var> total;
  for (std::size_t v = 0; v < discriminators.size(); ++v) {
    check_plan(plans[v], n);
    const Var xw = tape.matmul(x, discriminators[v]);
    const Var pos = tape.row_sum(tape.hadamard(xw, h));
    const Var neg = tape.row_sum(tape.hadamard(tape.gather_rows(xw, plans[v].permutation), h));
    const Var loss = contrastive_bce(tape, pos, neg);
    total = total ? tape.add(*total, loss) : loss;
  }
  return tape.scale(*total, 1.0 / static_cast<double>(discriminators.size()));
}

double agreement_loss(const Tensor& x, const Tensor& h,
                      const std::vector<BilinearDiscriminator>& discriminators,
                      const std::vector<CorruptionPlan>& plans) {
  Tape tape;
  std::vector<Var> ds;
  for (const auto& d : discriminators) ds.push_back(tape.constant(d.weight));
  return tape.value(agreement_loss(tape, tape.constant(x), tape.constant(h), ds, plans)).item();
}

Var consistency_loss(Tape& tape, Var h, const std::vector<Var>& views, Var discriminator,
                     const std::vector<CorruptionPlan>& plans) {
  if (views.empty() || views.size() != plans.size()) {
    throw ShapeError("consistency_loss needs one plan per view");
  }
  const std::size_t n = tape.value(h).rows();
  const Var hw = tape.matmul(h, discriminator);
  std::optional<Var> total;
  for (std::size_t v = 0; v < views.size(); ++v) {
    check_plan(plans[v], n);
    const Var pos = tape.row_sum(tape.hadamard(hw, views[v]));
    const Var neg =
        tape.row_sum(tape.hadamard(hw, tape.gather_rows(views[v], plans[v].permutation)));
    const Var loss = contrastive_bce(tape, pos, neg);
    total = total ? tape.add(*total, loss) : loss;
  }
  return tape.scale(*total, 1.0 / static_cast<double>(views.size()));
}

double consistency_loss(const Tensor& h, const std::vector<Tensor>& views,
                        const BilinearDiscriminator& discriminator,
                        const std::vector<CorruptionPlan>& plans) {
  Tape tape;
  std::vector<Var> vs;
  for (const auto& v : views) vs.push_back(tape.constant(v));
  const Var loss =
      consistency_loss(tape, tape.constant(h), vs, tape.constant(discriminator.weight), plans);
  return tape.value(loss).item();
}

Var platform_summary(Tape& tape, Var h) {
  if (tape.value(h).rows() == 0) throw ShapeError("platform summary of an empty embedding");
  return tape.sigmoid(tape.mean_rows(h));
}

Tensor platform_summary(const Tensor& h) {
  Tape tape;
  return tape.value(platform_summary(tape, tape.constant(h)));
}

Var alignment_loss(Tape& tape, Var h, Var summary, Var discriminator, const CorruptionPlan& plan) {
  check_plan(plan, tape.value(h).rows());
  // Scores h_i W Mᵀ; the corrupted side reuses them through the permutation.
  const Var pos = tape.matmul(tape.matmul(h, discriminator), tape.transpose(summary));
  const Var neg = tape.gather_rows(pos, plan.permutation);
  return contrastive_bce(tape, pos, neg);
}

double alignment_loss(const Tensor& h, const Tensor& summary,
                      const BilinearDiscriminator& discriminator, const CorruptionPlan& plan) {
  Tape tape;
  const Var loss = alignment_loss(tape, tape.constant(h), tape.constant(summary),
                                  tape.constant(discriminator.weight), plan);
  return tape.value(loss).item();
}

}  // namespace coursemi
