#include "coursemi/encoder.hpp"

#include <set>

#include "coursemi/error.hpp"

namespace coursemi {

Var encode(Tape& tape, const Tensor& a_hat, Var x, const std::vector<Var>& weights) {
  if (weights.empty()) throw ConfigError("encoder needs at least one layer");
  Var h = x;
  for (std::size_t l = 0; l < weights.size(); ++l) {
    if (l > 0) h = tape.relu(h);
    h = tape.matmul_const(a_hat, tape.matmul(h, weights[l]));
  }
  return h;
}

Tensor encode(const ViewGraph& view, const Tensor& x, const ViewEncoder& enc) {
  Tape tape;
  std::vector<Var> ws;
  for (const auto& w : enc.weights) ws.push_back(tape.constant(w));
  return tape.value(encode(tape, view.normalized, tape.constant(x), ws));
}

namespace {

void split_pairs(const std::vector<IndexPair>& pairs, std::vector<std::size_t>& left,
                 std::vector<std::size_t>& right) {
  left.reserve(pairs.size());
  right.reserve(pairs.size());
  for (const auto& [i, j] : pairs) {
    left.push_back(i);
    right.push_back(j);
  }
}

}  // namespace

Var pair_logits(Tape& tape, Var h, const std::vector<IndexPair>& pairs) {
  std::vector<std::size_t> left;
  std::vector<std::size_t> right;
  split_pairs(pairs, left, right);
  return tape.row_sum(tape.hadamard(tape.gather_rows(h, std::move(left)),
                                    tape.gather_rows(h, std::move(right))));
}

std::vector<double> decode_pairs(const Tensor& h, const std::vector<IndexPair>& pairs) {
  std::vector<double> out;
  out.reserve(pairs.size());
  for (const auto& [i, j] : pairs) {
    if (i >= h.rows() || j >= h.rows()) {
      throw ShapeError("pair (" + std::to_string(i) + ", " + std::to_string(j) +
                       ") out of range for " + std::to_string(h.rows()) + " courses");
    }
    double dot = 0.0;
    for (std::size_t c = 0; c < h.cols(); ++c) dot += h(i, c) * h(j, c);
    out.push_back(ops::sigmoid(dot));
  }
  return out;
}

EdgeSampleBatch sample_edges(const ViewGraph& view, Rng& rng, std::size_t max_pos) {
  EdgeSampleBatch batch;
  auto edges = view.edges;
  const std::size_t m = std::min(max_pos, edges.size());
  for (std::size_t i = 0; i < m; ++i) {
    std::uniform_int_distribution<std::size_t> pick(i, edges.size() - 1);
    std::swap(edges[i], edges[pick(rng)]);
  }
  batch.pos.assign(edges.begin(), edges.begin() + static_cast<std::ptrdiff_t>(m));
  if (m == 0) return batch;

  const std::size_t n = view.num_courses();
  const std::size_t total_pairs = n * (n - 1) / 2;
  const std::size_t non_edges = total_pairs - edges.size();
  const auto& a = view.adjacency;

  if (non_edges <= 4 * m) {
    std::vector<IndexPair> all;
    all.reserve(non_edges);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j)
        if (a(i, j) == 0.0) all.emplace_back(i, j);
    const std::size_t take = std::min(m, all.size());
    for (std::size_t i = 0; i < take; ++i) {
      std::uniform_int_distribution<std::size_t> pick(i, all.size() - 1);
      std::swap(all[i], all[pick(rng)]);
    }
    batch.neg.assign(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(take));
    return batch;
  }

  std::uniform_int_distribution<std::size_t> node(0, n - 1);
  std::set<IndexPair> chosen;
  while (batch.neg.size() < m) {
    auto i = node(rng);
    auto j = node(rng);
    if (i == j) continue;
    if (i > j) std::swap(i, j);
    if (a(i, j) != 0.0) continue;
    if (!chosen.emplace(i, j).second) continue;
    batch.neg.emplace_back(i, j);
  }
  return batch;
}

Var contrastive_bce(Tape& tape, std::optional<Var> pos_logits, std::optional<Var> neg_logits) {
  std::optional<Var> loss;
  if (pos_logits) loss = tape.mean_all(tape.softplus(tape.scale(*pos_logits, -1.0)));
  if (neg_logits) {
    const Var neg = tape.mean_all(tape.softplus(*neg_logits));
    loss = loss ? tape.add(*loss, neg) : neg;
  }
  return loss ? *loss : tape.constant(Tensor::scalar(0.0));
}

Var recon_loss(Tape& tape, Var h, const EdgeSampleBatch& batch) {
  std::optional<Var> pos;
  std::optional<Var> neg;
  if (!batch.pos.empty()) pos = pair_logits(tape, h, batch.pos);
  if (!batch.neg.empty()) neg = pair_logits(tape, h, batch.neg);
  return contrastive_bce(tape, pos, neg);
}

double recon_loss(const Tensor& h, const EdgeSampleBatch& batch) {
  Tape tape;
  return tape.value(recon_loss(tape, tape.constant(h), batch)).item();
}

double recon_loss(const std::vector<Tensor>& hs, const std::vector<EdgeSampleBatch>& batches) {
  if (hs.size() != batches.size() || hs.empty()) {
    throw ShapeError("recon_loss needs one batch per view");
  }
  double total = 0.0;
  for (std::size_t v = 0; v < hs.size(); ++v) total += recon_loss(hs[v], batches[v]);
  return total / static_cast<double>(hs.size());
}

}  // namespace coursemi
