#pragma once

// Reverse-mode differentiation over Tensor2D values. A Tape is rebuilt for every
// batch; nodes are appended in evaluation order, so a reverse walk over the
// node list is a valid reverse topological order.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <span>
#include <stdexcept>
#include <string>
#include <type_traits>
#include <unordered_map>
#include <vector>

#include "msis/tensor.hpp"

namespace msis {

/// Broken caller contract (non-scalar backward root, nondeterministic loss, ...).
class ContractError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

struct Parameter {
  Tensor2D value;
  Tensor2D grad;
};

/// Named trainable tensors. Iteration order is lexicographic by name.
class ParamStore {
 public:
  ParamStore() = default;
  explicit ParamStore(std::uint64_t seed) : seed_(seed) {}

  Parameter& add(const std::string& name, Tensor2D init);
  Parameter& at(const std::string& name);
  const Parameter& at(const std::string& name) const;
  bool contains(const std::string& name) const { return params_.count(name) != 0; }

  std::vector<std::string> names() const;
  std::size_t tensor_count() const { return params_.size(); }
  std::size_t scalar_count() const;
  std::uint64_t seed() const { return seed_; }

  void zero_grad();

  auto begin() { return params_.begin(); }
  auto end() { return params_.end(); }
  auto begin() const { return params_.begin(); }
  auto end() const { return params_.end(); }

  friend bool operator==(const ParamStore& a, const ParamStore& b);

 private:
  std::map<std::string, Parameter> params_;
  std::uint64_t seed_ = 0;
};

class Tape;

/// Handle to a node on a Tape.
class Var {
 public:
  Var() = default;
  Var(Tape* tape, std::size_t id) : tape_(tape), id_(id) {}

  const Tensor2D& value() const;
  /// Adjoint after a backward sweep; all zeros before one.
  Tensor2D adjoint() const;
  std::size_t rows() const { return value().rows(); }
  std::size_t cols() const { return value().cols(); }
  /// Value of a 1x1 node.
  double scalar() const;

  Tape& tape() const { return *tape_; }
  std::size_t id() const { return id_; }
  bool valid() const { return tape_ != nullptr; }

 private:
  Tape* tape_ = nullptr;
  std::size_t id_ = 0;
};

class Tape {
 public:
  /// With recording off the tape only evaluates values; backward() is unavailable.
  explicit Tape(bool record = true) : record_(record) { nodes_.reserve(512); }
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  bool recording() const { return record_; }

  Var constant(Tensor2D value);
  /// Leaf bound to a parameter; a backward sweep adds into Parameter::grad.
  /// Repeated calls for the same parameter return the same node. The node
  /// reads the parameter's storage directly, so the parameter must not be
  /// modified while the tape is in use.
  Var param(Parameter& p);

  /// Populates adjoints of every ancestor of a 1x1 root and accumulates
  /// parameter gradients.
  void backward(Var root);

  std::size_t size() const { return nodes_.size(); }

  // Used by operation implementations.
  using BackwardFn = std::function<void(Tape&, std::size_t self)>;
  /// Appends a node; the backward closure is kept only when recording.
  template <class F>
  Var push(Tensor2D value, F&& backward) {
    Node node;
    node.value = std::move(value);
    if constexpr (!std::is_same_v<std::decay_t<F>, std::nullptr_t>) {
      if (record_) node.backward = std::forward<F>(backward);
    }
    nodes_.push_back(std::move(node));
    return Var(this, nodes_.size() - 1);
  }
  const Tensor2D& value(std::size_t id) const {
    const Node& n = nodes_[id];
    return n.param != nullptr ? n.param->value : n.value;
  }
  Tensor2D& adjoint(std::size_t id) { return nodes_[id].adjoint; }
  bool has_adjoint(std::size_t id) const { return !nodes_[id].adjoint.values().empty(); }

 private:
  struct Node {
    Tensor2D value;
    Tensor2D adjoint;
    BackwardFn backward;
    Parameter* param = nullptr;
  };
  friend class Var;

  bool record_;
  bool swept_ = false;
  std::vector<Node> nodes_;
  std::unordered_map<const Parameter*, std::size_t> param_nodes_;
};

enum class Reduction { kSum, kMean };

// Differentiable operations. Every operand must live on the same tape.

Var dense(Var input, Var weight, Var bias);
Var relu(Var x);
/// Elementwise logistic function clamped to [kProbEpsilon, 1 - kProbEpsilon].
Var sigmoid(Var x);
Var add(Var a, Var b);
Var mul(Var a, Var b);
Var scale(Var a, double c);
/// Per-row dot product: [b x k], [b x k] -> [b x 1].
Var row_dot(Var a, Var b);
/// Horizontal concatenation of column blocks with equal row counts.
Var concat_cols(std::span<const Var> parts);
/// Softmax across the columns of every row.
Var row_softmax(Var scores);
Var column(Var a, std::size_t j);
/// Multiplies row i of a by w(i, 0).
Var scale_rows(Var a, Var w);
Var sum(Var a);
/// Sum of c_i * s_i over 1x1 nodes.
Var weighted_sum(std::span<const Var> scalars, std::span<const double> weights);

/// Sentinel stored in label slots that are not observed. Reading one is a bug.
double label_poison() noexcept;

/// Mean binary cross-entropy over entries with mask == 1; 0 when none are
/// labeled. probs is [b x 1]; labels and mask have length b. A masked-in
/// label holding the poison sentinel raises ContractError.
Var masked_bce(Var probs, std::span<const double> labels, std::span<const double> mask);

/// Binary entropy of probs over entries with mask == 0, summed or averaged;
/// 0 when every entry is labeled.
Var entropy_regularizer(Var probs, std::span<const double> mask, Reduction reduction);

}  // namespace msis
