#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

#include "coursemi/tensor.hpp"

namespace coursemi {

// Named trainable tensors with matching gradient accumulators.
class ParamStore {
 public:
  struct Slot {
    std::string name;
    Tensor value;
    Tensor grad;
    bool trainable = true;
  };

  // Returns the slot index. Throws ConfigError if the name is taken.
  std::size_t add(std::string name, Tensor value, bool trainable = true);

  bool contains(const std::string& name) const { return index_.count(name) != 0; }
  std::size_t index(const std::string& name) const;
  std::size_t size() const { return slots_.size(); }

  Slot& slot(std::size_t i) { return slots_.at(i); }
  const Slot& slot(std::size_t i) const { return slots_.at(i); }
  Tensor& value(const std::string& name) { return slots_[index(name)].value; }
  const Tensor& value(const std::string& name) const { return slots_[index(name)].value; }
  const Tensor& grad(const std::string& name) const { return slots_[index(name)].grad; }

  std::vector<Slot>& slots() { return slots_; }
  const std::vector<Slot>& slots() const { return slots_; }

  void zero_grad();

  // Checkpoint text: one `name<TAB>rows<TAB>cols<TAB>v...` line per slot
  // under a version header. Values round-trip exactly.
  std::string serialize() const;
  // Replaces values of existing slots; shapes and names must match.
  void deserialize(const std::string& text, const std::string& source = "checkpoint");
  void save(const std::string& path) const;
  void load(const std::string& path);

 private:
  std::vector<Slot> slots_;
  std::unordered_map<std::string, std::size_t> index_;
};

// Handle to a value recorded on a Tape.
struct Var {
  std::uint32_t id = UINT32_MAX;
  bool valid() const { return id != UINT32_MAX; }
};

// Records tensor primitives during a forward pass and replays them in
// reverse to accumulate ∂loss/∂param into a ParamStore. One Tape serves one
// forward/backward step; call reset() (or use a fresh tape) before reuse.
class Tape {
 public:
  Var constant(Tensor value);
  // Leaf bound to a ParamStore slot. Gradients land in the slot on backward().
  Var param(ParamStore& store, const std::string& name);

  const Tensor& value(Var v) const { return nodes_.at(v.id).value; }
  // Gradient of the last backward() seed w.r.t. a recorded value.
  const Tensor& grad(Var v) const { return nodes_.at(v.id).grad; }

  Var matmul(Var a, Var b);
  // lhs · b for a constant lhs held by the caller; `lhs` must outlive the
  // tape's backward pass. Avoids copying large propagation matrices.
  Var matmul_const(const Tensor& lhs, Var b);
  Var transpose(Var a);
  Var add(Var a, Var b);
  Var sub(Var a, Var b);
  Var add_row(Var a, Var row);
  Var hadamard(Var a, Var b);
  Var scale(Var a, double c);
  // 1×1 `s` times every entry of `a`.
  Var mul_scalar(Var s, Var a);
  Var sigmoid(Var a);
  Var tanh(Var a);
  Var relu(Var a);
  Var softplus(Var a);
  Var softmax_vec(Var a);
  Var mean_rows(Var a);
  Var row_sum(Var a);
  Var mean_all(Var a);
  Var sum_all(Var a);
  Var gather_rows(Var a, std::vector<std::size_t> idx);
  Var element(Var a, std::size_t r, std::size_t c);
  // Joins 1×1 values into a 1×n row.
  Var concat_scalars(const std::vector<Var>& xs);
  // Mean over rows of -log softmax(logits_i)[labels_i], as a 1×1 value.
  Var cross_entropy(Var logits, std::vector<std::size_t> labels);
  // Inverted dropout with a fixed keep mask (entries 0 or 1/(1-rate)).
  Var apply_mask(Var a, Tensor mask);

  // Backpropagates from a 1×1 value. Throws std::logic_error if called twice
  // without reset().
  void backward(Var loss, double seed = 1.0);
  void reset();

  std::size_t size() const { return nodes_.size(); }

 private:
  enum class Op : std::uint8_t {
    Constant, Param, MatMul, MatMulConst, Transpose, Add, Sub, AddRow, Hadamard, Scale, MulScalar,
    Sigmoid, Tanh, Relu, Softplus, Softmax, MeanRows, RowSum, MeanAll, SumAll, Gather,
    Element, Concat, Mask, CrossEntropy,
  };

  struct Node {
    Op op;
    Tensor value;
    Tensor grad;
    std::vector<std::uint32_t> inputs;
    bool needs_grad = false;
    double scalar = 0.0;
    std::vector<std::size_t> index;
    Tensor aux;
    const Tensor* external = nullptr;
    ParamStore* store = nullptr;
    std::size_t slot = 0;
  };

  Var push(Op op, Tensor value, std::vector<std::uint32_t> inputs);
  Node& node(Var v) { return nodes_.at(v.id); }
  void accumulate(std::uint32_t id, const Tensor& g);

  std::vector<Node> nodes_;
  bool backward_done_ = false;
};

}  // namespace coursemi
