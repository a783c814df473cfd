#include "coursemi/autograd.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "coursemi/error.hpp"
#include "coursemi/io.hpp"

namespace coursemi {

namespace {

constexpr const char* kCheckpointHeader = "# coursemi-checkpoint v1";

void add_into(Tensor& dst, const Tensor& src) {
  auto d = dst.data();
  auto s = src.data();
  for (std::size_t i = 0; i < d.size(); ++i) d[i] += s[i];
}

}  // namespace

// ---------------------------------------------------------------------------
// ParamStore

std::size_t ParamStore::add(std::string name, Tensor value, bool trainable) {
  if (index_.count(name)) throw ConfigError("duplicate parameter '" + name + "'");
  const auto idx = slots_.size();
  index_.emplace(name, idx);
  Tensor grad(value.rows(), value.cols());
  slots_.push_back({std::move(name), std::move(value), std::move(grad), trainable});
  return idx;
}

std::size_t ParamStore::index(const std::string& name) const {
  const auto it = index_.find(name);
  if (it == index_.end()) throw ConfigError("unknown parameter '" + name + "'");
  return it->second;
}

void ParamStore::zero_grad() {
  for (auto& s : slots_) {
    for (auto& g : s.grad.data()) g = 0.0;
  }
}

std::string ParamStore::serialize() const {
  std::string out = kCheckpointHeader;
  out += '\n';
  for (const auto& s : slots_) {
    out += s.name;
    out += '\t' + std::to_string(s.value.rows()) + '\t' + std::to_string(s.value.cols());
    for (const double v : s.value.data()) {
      out += '\t';
      out += io::format_double(v);
    }
    out += '\n';
  }
  return out;
}

void ParamStore::deserialize(const std::string& text, const std::string& source) {
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  if (!std::getline(in, line) || line != kCheckpointHeader) {
    throw ParseError(source, 1, "not a coursemi checkpoint");
  }
  ++lineno;
  std::vector<bool> seen(slots_.size(), false);
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto f = io::split(line, '\t');
    std::size_t rows = 0;
    std::size_t cols = 0;
    if (f.size() < 3 || !io::parse_size(f[1], rows) || !io::parse_size(f[2], cols) ||
        f.size() != 3 + rows * cols) {
      throw ParseError(source, lineno, "malformed tensor row");
    }
    const std::string name(f[0]);
    const auto it = index_.find(name);
    if (it == index_.end()) throw SchemaError(source + ": unexpected tensor '" + name + "'");
    auto& slot = slots_[it->second];
    if (slot.value.rows() != rows || slot.value.cols() != cols) {
      throw SchemaError(source + ": tensor '" + name + "' has shape (" + std::to_string(rows) + "x" +
                        std::to_string(cols) + "), model expects " + slot.value.shape_string());
    }
    for (std::size_t i = 0; i < rows * cols; ++i) {
      if (!io::parse_double(f[3 + i], slot.value.data()[i])) {
        throw ParseError(source, lineno, "bad value in tensor '" + name + "'");
      }
    }
    seen[it->second] = true;
  }
  for (std::size_t i = 0; i < slots_.size(); ++i) {
    if (!seen[i]) throw SchemaError(source + ": missing tensor '" + slots_[i].name + "'");
  }
}

void ParamStore::save(const std::string& path) const { io::write_atomic(path, serialize()); }

void ParamStore::load(const std::string& path) { deserialize(io::read_file(path), path); }

// ---------------------------------------------------------------------------
// Tape

Var Tape::push(Op op, Tensor value, std::vector<std::uint32_t> inputs) {
  if (!value.all_finite()) {
    throw NumericFault("non-finite value produced by tape op #" +
                       std::to_string(static_cast<int>(op)) + " " + value.shape_string());
  }
  Node n;
  n.op = op;
  n.value = std::move(value);
  for (const auto in : inputs) n.needs_grad = n.needs_grad || nodes_.at(in).needs_grad;
  n.inputs = std::move(inputs);
  nodes_.push_back(std::move(n));
  return Var{static_cast<std::uint32_t>(nodes_.size() - 1)};
}

Var Tape::constant(Tensor value) { return push(Op::Constant, std::move(value), {}); }

Var Tape::param(ParamStore& store, const std::string& name) {
  const auto idx = store.index(name);
  auto v = push(Op::Param, store.slot(idx).value, {});
  auto& n = node(v);
  n.store = &store;
  n.slot = idx;
  n.needs_grad = store.slot(idx).trainable;
  return v;
}

Var Tape::matmul(Var a, Var b) { return push(Op::MatMul, ops::matmul(value(a), value(b)), {a.id, b.id}); }
Var Tape::matmul_const(const Tensor& lhs, Var b) {
  auto v = push(Op::MatMulConst, ops::matmul(lhs, value(b)), {b.id});
  node(v).external = &lhs;
  return v;
}

Var Tape::transpose(Var a) { return push(Op::Transpose, ops::transpose(value(a)), {a.id}); }
Var Tape::add(Var a, Var b) { return push(Op::Add, ops::add(value(a), value(b)), {a.id, b.id}); }
Var Tape::sub(Var a, Var b) { return push(Op::Sub, ops::sub(value(a), value(b)), {a.id, b.id}); }
Var Tape::add_row(Var a, Var row) {
  return push(Op::AddRow, ops::add_row(value(a), value(row)), {a.id, row.id});
}
Var Tape::hadamard(Var a, Var b) {
  return push(Op::Hadamard, ops::hadamard(value(a), value(b)), {a.id, b.id});
}

Var Tape::scale(Var a, double c) {
  auto v = push(Op::Scale, ops::scale(value(a), c), {a.id});
  node(v).scalar = c;
  return v;
}

Var Tape::mul_scalar(Var s, Var a) {
  return push(Op::MulScalar, ops::scale(value(a), value(s).item()), {s.id, a.id});
}

Var Tape::sigmoid(Var a) { return push(Op::Sigmoid, ops::sigmoid(value(a)), {a.id}); }
Var Tape::tanh(Var a) { return push(Op::Tanh, ops::tanh(value(a)), {a.id}); }
Var Tape::relu(Var a) { return push(Op::Relu, ops::relu(value(a)), {a.id}); }
Var Tape::softplus(Var a) { return push(Op::Softplus, ops::softplus(value(a)), {a.id}); }
Var Tape::softmax_vec(Var a) { return push(Op::Softmax, ops::softmax_vec(value(a)), {a.id}); }
Var Tape::mean_rows(Var a) { return push(Op::MeanRows, ops::mean_rows(value(a)), {a.id}); }
Var Tape::row_sum(Var a) { return push(Op::RowSum, ops::row_sum(value(a)), {a.id}); }
Var Tape::mean_all(Var a) {
  return push(Op::MeanAll, Tensor::scalar(ops::mean_all(value(a))), {a.id});
}
Var Tape::sum_all(Var a) { return push(Op::SumAll, Tensor::scalar(ops::sum_all(value(a))), {a.id}); }

Var Tape::gather_rows(Var a, std::vector<std::size_t> idx) {
  auto v = push(Op::Gather, ops::gather_rows(value(a), idx), {a.id});
  node(v).index = std::move(idx);
  return v;
}

Var Tape::element(Var a, std::size_t r, std::size_t c) {
  auto v = push(Op::Element, Tensor::scalar(value(a).at(r, c)), {a.id});
  node(v).index = {r, c};
  return v;
}

Var Tape::concat_scalars(const std::vector<Var>& xs) {
  Tensor out(1, xs.size());
  std::vector<std::uint32_t> ids;
  ids.reserve(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) {
    out(0, i) = value(xs[i]).item();
    ids.push_back(xs[i].id);
  }
  return push(Op::Concat, std::move(out), std::move(ids));
}

Var Tape::apply_mask(Var a, Tensor mask) {
  auto v = push(Op::Mask, ops::hadamard(value(a), mask), {a.id});
  node(v).aux = std::move(mask);
  return v;
}

Var Tape::cross_entropy(Var logits, std::vector<std::size_t> labels) {
  const auto& z = value(logits);
  if (labels.size() != z.rows() || z.rows() == 0) {
    throw ShapeError("cross_entropy: " + std::to_string(labels.size()) + " labels for " +
                     z.shape_string() + " logits");
  }
  Tensor probs(z.rows(), z.cols());
  double loss = 0.0;
  for (std::size_t r = 0; r < z.rows(); ++r) {
    if (labels[r] >= z.cols()) throw ShapeError("cross_entropy: label out of range");
    double mx = z(r, 0);
    for (std::size_t c = 1; c < z.cols(); ++c) mx = std::max(mx, z(r, c));
    double sum = 0.0;
    for (std::size_t c = 0; c < z.cols(); ++c) sum += std::exp(z(r, c) - mx);
    for (std::size_t c = 0; c < z.cols(); ++c) probs(r, c) = std::exp(z(r, c) - mx) / sum;
    loss += mx + std::log(sum) - z(r, labels[r]);
  }
  auto v = push(Op::CrossEntropy, Tensor::scalar(loss / static_cast<double>(z.rows())), {logits.id});
  node(v).aux = std::move(probs);
  node(v).index = std::move(labels);
  return v;
}

void Tape::accumulate(std::uint32_t id, const Tensor& g) {
  auto& n = nodes_[id];
  if (!n.needs_grad) return;
  if (n.grad.empty() && !n.value.empty()) {
    n.grad = g;
  } else {
    add_into(n.grad, g);
  }
}

void Tape::reset() {
  nodes_.clear();
  backward_done_ = false;
}

void Tape::backward(Var loss, double seed) {
  if (backward_done_) throw std::logic_error("tape replayed twice without reset");
  if (value(loss).rows() != 1 || value(loss).cols() != 1) {
    throw ShapeError("backward() needs a scalar loss, got " + value(loss).shape_string());
  }
  backward_done_ = true;
  for (auto& n : nodes_) n.grad = Tensor();
  nodes_[loss.id].grad = Tensor::scalar(seed);

  for (std::int64_t i = loss.id; i >= 0; --i) {
    Node& n = nodes_[static_cast<std::size_t>(i)];
    if (!n.needs_grad || n.grad.empty()) continue;
    const Tensor& g = n.grad;
    const auto in = [&](std::size_t k) -> const Tensor& { return nodes_[n.inputs[k]].value; };
    const auto wants = [&](std::size_t k) { return nodes_[n.inputs[k]].needs_grad; };

    switch (n.op) {
      case Op::Constant:
        break;
      case Op::Param:
        if (n.store) add_into(n.store->slot(n.slot).grad, g);
        break;
      case Op::MatMul:
        if (wants(0)) accumulate(n.inputs[0], ops::matmul(g, ops::transpose(in(1))));
        if (wants(1)) accumulate(n.inputs[1], ops::matmul(ops::transpose(in(0)), g));
        break;
      case Op::MatMulConst:
        accumulate(n.inputs[0], ops::matmul(ops::transpose(*n.external), g));
        break;
      case Op::Transpose:
        accumulate(n.inputs[0], ops::transpose(g));
        break;
      case Op::Add:
        accumulate(n.inputs[0], g);
        accumulate(n.inputs[1], g);
        break;
      case Op::Sub:
        accumulate(n.inputs[0], g);
        if (wants(1)) accumulate(n.inputs[1], ops::scale(g, -1.0));
        break;
      case Op::AddRow:
        accumulate(n.inputs[0], g);
        if (wants(1)) {
          Tensor col(1, g.cols());
          for (std::size_t r = 0; r < g.rows(); ++r)
            for (std::size_t c = 0; c < g.cols(); ++c) col(0, c) += g(r, c);
          accumulate(n.inputs[1], col);
        }
        break;
      case Op::Hadamard:
        if (wants(0)) accumulate(n.inputs[0], ops::hadamard(g, in(1)));
        if (wants(1)) accumulate(n.inputs[1], ops::hadamard(g, in(0)));
        break;
      case Op::Scale:
        accumulate(n.inputs[0], ops::scale(g, n.scalar));
        break;
      case Op::MulScalar:
        if (wants(0)) accumulate(n.inputs[0], Tensor::scalar(ops::sum_all(ops::hadamard(g, in(1)))));
        if (wants(1)) accumulate(n.inputs[1], ops::scale(g, in(0).item()));
        break;
      case Op::Sigmoid: {
        Tensor d = g;
        for (std::size_t k = 0; k < d.size(); ++k) {
          const double y = n.value.data()[k];
          d.data()[k] *= y * (1.0 - y);
        }
        accumulate(n.inputs[0], d);
        break;
      }
      case Op::Tanh: {
        Tensor d = g;
        for (std::size_t k = 0; k < d.size(); ++k) {
          const double y = n.value.data()[k];
          d.data()[k] *= 1.0 - y * y;
        }
        accumulate(n.inputs[0], d);
        break;
      }
      case Op::Relu: {
        Tensor d = g;
        for (std::size_t k = 0; k < d.size(); ++k) {
          if (in(0).data()[k] <= 0.0) d.data()[k] = 0.0;
        }
        accumulate(n.inputs[0], d);
        break;
      }
      case Op::Softplus: {
        Tensor d = g;
        for (std::size_t k = 0; k < d.size(); ++k) d.data()[k] *= ops::sigmoid(in(0).data()[k]);
        accumulate(n.inputs[0], d);
        break;
      }
      case Op::Softmax: {
        const double dot = ops::sum_all(ops::hadamard(g, n.value));
        Tensor d(g.rows(), g.cols());
        for (std::size_t k = 0; k < d.size(); ++k) {
          d.data()[k] = n.value.data()[k] * (g.data()[k] - dot);
        }
        accumulate(n.inputs[0], d);
        break;
      }
      case Op::MeanRows: {
        const auto& a = in(0);
        Tensor d(a.rows(), a.cols());
        const double inv = 1.0 / static_cast<double>(a.rows());
        for (std::size_t r = 0; r < a.rows(); ++r)
          for (std::size_t c = 0; c < a.cols(); ++c) d(r, c) = g(0, c) * inv;
        accumulate(n.inputs[0], d);
        break;
      }
      case Op::RowSum: {
        const auto& a = in(0);
        Tensor d(a.rows(), a.cols());
        for (std::size_t r = 0; r < a.rows(); ++r)
          for (std::size_t c = 0; c < a.cols(); ++c) d(r, c) = g(r, 0);
        accumulate(n.inputs[0], d);
        break;
      }
      case Op::MeanAll: {
        const auto& a = in(0);
        accumulate(n.inputs[0], Tensor(a.rows(), a.cols(), g.item() / static_cast<double>(a.size())));
        break;
      }
      case Op::SumAll: {
        const auto& a = in(0);
        accumulate(n.inputs[0], Tensor(a.rows(), a.cols(), g.item()));
        break;
      }
      case Op::Gather: {
        const auto& a = in(0);
        Tensor d(a.rows(), a.cols());
        for (std::size_t r = 0; r < n.index.size(); ++r)
          for (std::size_t c = 0; c < a.cols(); ++c) d(n.index[r], c) += g(r, c);
        accumulate(n.inputs[0], d);
        break;
      }
      case Op::Element: {
        const auto& a = in(0);
        Tensor d(a.rows(), a.cols());
        d(n.index[0], n.index[1]) = g.item();
        accumulate(n.inputs[0], d);
        break;
      }
      case Op::Concat:
        for (std::size_t k = 0; k < n.inputs.size(); ++k) {
          if (wants(k)) accumulate(n.inputs[k], Tensor::scalar(g(0, k)));
        }
        break;
      case Op::Mask:
        accumulate(n.inputs[0], ops::hadamard(g, n.aux));
        break;
      case Op::CrossEntropy: {
        Tensor d = n.aux;
        const double inv = g.item() / static_cast<double>(d.rows());
        for (std::size_t r = 0; r < d.rows(); ++r) {
          d(r, n.index[r]) -= 1.0;
          for (std::size_t c = 0; c < d.cols(); ++c) d(r, c) *= inv;
        }
        accumulate(n.inputs[0], d);
        break;
      }
    }
  }
}

}  // namespace coursemi
