#pragma once

#include <cstdint>
#include <deque>
#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "htgcn/dense_matrix.hpp"

// Reverse-mode differentiation over dense matrices.
//
// A Tape records every operation in creation order, which is always a valid
// topological order of the computation DAG. Values are cheap handles into the
// tape. Trainable state lives in Parameter objects that outlive any single
// tape; backward() accumulates into Parameter::grad, and the optimizer zeroes
// it after each step.
namespace htgcn::ad {

struct Parameter {
  Parameter() = default;
  Parameter(std::string name, DenseMatrix value);

  std::string name;
  DenseMatrix value;
  DenseMatrix grad;

  void zero_grad() { grad.fill(0.0); }
};

class Tape;

class Value {
 public:
  Value() = default;

  const DenseMatrix& data() const;
  const DenseMatrix& grad() const;
  std::size_t rows() const { return data().rows(); }
  std::size_t cols() const { return data().cols(); }
  std::size_t id() const noexcept { return id_; }
  Tape& tape() const { return *tape_; }
  bool valid() const noexcept { return tape_ != nullptr; }

 private:
  friend class Tape;
  Value(Tape* tape, std::size_t id) : tape_(tape), id_(id) {}

  Tape* tape_ = nullptr;
  std::size_t id_ = 0;
};

struct BackwardContext {
  const DenseMatrix& output;
  const DenseMatrix& output_grad;
  std::span<const DenseMatrix* const> inputs;
  // Accumulate (+=) into these; they may already hold contributions.
  std::span<DenseMatrix* const> input_grads;
};

using BackwardFn = std::function<void(const BackwardContext&)>;

class Tape {
 public:
  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  Value constant(DenseMatrix data);
  // Leaf bound to an external parameter. Repeated calls return the same Value.
  Value parameter(Parameter& p);

  // Appends an operation. `fn` receives the upstream gradient and must add its
  // contribution to each input gradient. All inputs must belong to this tape.
  Value record(std::string_view op, DenseMatrix data, std::vector<Value> inputs, BackwardFn fn);

  // Fills gradients of every Value the 1x1 `loss` depends on; the rest stay
  // zero. Tape gradients are reset first, so calling this twice gives the same
  // tape gradients, but bound Parameter::grad accumulates each time.
  void backward(Value loss);

  std::size_t size() const noexcept { return nodes_.size(); }
  std::string_view op(Value v) const;
  std::span<const std::size_t> inputs(Value v) const;

 private:
  friend class Value;

  struct Node {
    std::string op;
    DenseMatrix data;
    DenseMatrix grad;
    std::vector<std::size_t> inputs;
    BackwardFn backward;
    Parameter* parameter = nullptr;
  };

  const Node& node(Value v) const;

  // deque keeps references returned by Value::data() valid across appends
  std::deque<Node> nodes_;
  std::unordered_map<const Parameter*, std::size_t> parameter_ids_;
};

// Forward primitives. Each throws ShapeError naming both shapes on mismatch.
Value matmul(Value a, Value b);
Value add(Value a, Value b);
Value elementwise_mul(Value a, Value b);
Value scale(Value a, double factor);
Value relu(Value a);  // subgradient 0 at 0
Value sigmoid(Value a);
Value tanh(Value a);
Value transpose(Value a);
Value row_concat(std::span<const Value> parts);  // stacks vertically
Value scalar_sum(Value a);                       // 1x1
Value softmax_over_rows(Value a);                // max-subtracted
// out[i,:] = weights[i] * z[i,:]; weights is N x 1 or 1 x N.
Value diag_row_scale(Value z, Value weights);
Value gather_rows(Value a, std::span<const std::size_t> rows);
// out = base; out[rows[p], :] += src[p, :]
Value scatter_add_rows(Value base, Value src, std::span<const std::size_t> rows);
// out[p, i*b.cols + j] = a[p,i] * b[p,j]
Value row_outer(Value a, Value b);

struct GradCheckReport {
  double max_relative_error = 0.0;
  std::string worst_parameter;
  std::size_t worst_index = 0;
  double analytic = 0.0;
  double numeric = 0.0;
  std::size_t entries_checked = 0;
};

using LossFn = std::function<Value(Tape&)>;

// Central-difference check of every entry of every parameter. Relative error
// uses max(|analytic|, |numeric|, 1e-12) as denominator. Callers pick points
// away from ReLU kinks. Parameter values and gradients are restored/zeroed on return.
GradCheckReport finite_difference_check(const LossFn& loss, std::span<Parameter* const> params,
                                        double h = 1e-6);

struct AdamOptions {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

class Adam {
 public:
  Adam(std::vector<Parameter*> params, AdamOptions options = {});

  // One bias-corrected update from the current gradients, which are then zeroed.
  void step();

  std::int64_t step_count() const noexcept { return steps_; }
  const AdamOptions& options() const noexcept { return options_; }

 private:
  std::vector<Parameter*> params_;
  AdamOptions options_;
  std::vector<DenseMatrix> first_;
  std::vector<DenseMatrix> second_;
  std::int64_t steps_ = 0;
};

}  // namespace htgcn::ad
