#include "coursemi/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

namespace coursemi {

std::string GradCheckReport::render() const {
  std::string out;
  char buf[256];
  for (const auto& p : params) {
    std::snprintf(buf, sizeof buf, "%s\t%.3e\t%s\n", p.name.c_str(), p.max_rel_error,
                  p.pass ? "ok" : "FAIL");
    out += buf;
  }
  return out;
}

GradCheckReport check_gradients(ParamStore& params, const std::function<Var(Tape&)>& build,
                                const GradCheckOptions& opts) {
  params.zero_grad();
  {
    Tape tape;
    tape.backward(build(tape));
  }
  const auto eval = [&] {
    Tape tape;
    return tape.value(build(tape)).item();
  };

  GradCheckReport report;
  report.pass = true;
  for (auto& slot : params.slots()) {
    if (!slot.trainable) continue;
    ParamGradError e{slot.name, 0.0, false};
    auto w = slot.value.data();
    const auto g = slot.grad.data();
    for (std::size_t i = 0; i < w.size(); ++i) {
      const double keep = w[i];
      w[i] = keep + opts.eps;
      const double up = eval();
      w[i] = keep - opts.eps;
      const double down = eval();
      w[i] = keep;
      const double numeric = (up - down) / (2.0 * opts.eps);
      const double denom = std::max({std::abs(g[i]), std::abs(numeric), 1e-3});
      e.max_rel_error = std::max(e.max_rel_error, std::abs(g[i] - numeric) / denom);
    }
    e.pass = e.max_rel_error < opts.tolerance;
    report.pass = report.pass && e.pass;
    report.max_rel_error = std::max(report.max_rel_error, e.max_rel_error);
    report.params.push_back(std::move(e));
  }
  return report;
}

GradCheckReport check_gradients(Model& model, const std::vector<ViewGraph>& views,
                                const FeatureMatrix& x, const EpochSamples& samples,
                                const LossWeights& weights, const GradCheckOptions& opts) {
  return check_gradients(
      model.params(),
      [&](Tape& tape) { return model.forward(tape, views, x, samples, weights).total; }, opts);
}

}  // namespace coursemi
