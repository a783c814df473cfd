#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "coursemi/autograd.hpp"
#include "coursemi/encoder.hpp"

namespace coursemi {

// Row permutation used to build negative pairs.
struct CorruptionPlan {
  std::vector<std::size_t> permutation;
  std::uint64_t seed = 0;

  static CorruptionPlan identity(std::size_t n);
  // Uniform random permutation drawn from `rng`; for n > 1 the identity is
  // rejected and redrawn.
  static CorruptionPlan sample(std::size_t n, Rng& rng);
  static CorruptionPlan from_seed(std::size_t n, std::uint64_t seed);

  bool is_identity() const;
};

// Row i of the result is row permutation[i] of `t`.
Tensor corrupt_rows(const Tensor& t, const CorruptionPlan& plan);

// Scores pairs (x_i, y_i) as σ(x_iᵀ W y_i).
struct BilinearDiscriminator {
  std::string name;
  Tensor weight;

  std::vector<double> score(const Tensor& left, const Tensor& right) const;
};

// Per-row bilinear logits x_iᵀ W y_i as an N×1 column.
Var bilinear_logits(Tape& tape, Var left, Var weight, Var right);

// Raw feature / unified representation agreement. One discriminator and one
// plan per view; positives (X_i, h_i), negatives (X_{π(i)}, h_i). Per-view
// BCE means are summed and divided by the number of views.
Var agreement_loss(Tape& tape, Var x, Var h, const std::vector<Var>& discriminators,
                   const std::vector<CorruptionPlan>& plans);
double agreement_loss(const Tensor& x, const Tensor& h,
                      const std::vector<BilinearDiscriminator>& discriminators,
                      const std::vector<CorruptionPlan>& plans);

// Unified / per-view consistency with one shared discriminator. Positives
// (h_i, h̃_i), negatives (h_i, h̃_{π(i)}), averaged over views.
Var consistency_loss(Tape& tape, Var h, const std::vector<Var>& views, Var discriminator,
                     const std::vector<CorruptionPlan>& plans);
double consistency_loss(const Tensor& h, const std::vector<Tensor>& views,
                        const BilinearDiscriminator& discriminator,
                        const std::vector<CorruptionPlan>& plans);

// σ of the column means of h, as a 1×k row. Throws ShapeError on empty h.
Var platform_summary(Tape& tape, Var h);
Tensor platform_summary(const Tensor& h);

// Course / platform alignment: positives (h_i, M), negatives (h_{π(i)}, M).
Var alignment_loss(Tape& tape, Var h, Var summary, Var discriminator, const CorruptionPlan& plan);
double alignment_loss(const Tensor& h, const Tensor& summary,
                      const BilinearDiscriminator& discriminator, const CorruptionPlan& plan);

}  // namespace coursemi
