#pragma once

#include <functional>
#include <string>
#include <vector>

#include "coursemi/autograd.hpp"
#include "coursemi/model.hpp"

namespace coursemi {

struct GradCheckOptions {
  double eps = 1e-5;
  double tolerance = 1e-4;
};

struct ParamGradError {
  std::string name;
  double max_rel_error = 0.0;
  bool pass = false;
};

struct GradCheckReport {
  std::vector<ParamGradError> params;
  double max_rel_error = 0.0;
  bool pass = false;

  std::string render() const;
};

// Compares tape gradients with central differences for every trainable entry
// of `params`. `build` records a scalar loss on a fresh tape using `params`.
// Per-entry error is |a - n| / max(|a|, |n|, 1e-3); an entry passes when the
// error is strictly below the tolerance.
GradCheckReport check_gradients(ParamStore& params, const std::function<Var(Tape&)>& build,
                                const GradCheckOptions& opts = {});

// The same check on the model's full weighted objective with fixed samples.
GradCheckReport check_gradients(Model& model, const std::vector<ViewGraph>& views,
                                const FeatureMatrix& x, const EpochSamples& samples,
                                const LossWeights& weights, const GradCheckOptions& opts = {});

}  // namespace coursemi
