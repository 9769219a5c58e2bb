#include "htgcn/autodiff.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>

#include "htgcn/errors.hpp"
#include "htgcn/kernels.hpp"

namespace htgcn::ad {

namespace {

void require_same_tape(const Value& a, const Value& b, const char* op) {
  if (!a.valid() || !b.valid() || &a.tape() != &b.tape()) {
    throw Error(std::string(op) + ": operands belong to different tapes");
  }
}

[[noreturn]] void shape_mismatch(const char* op, const DenseMatrix& a, const DenseMatrix& b) {
  throw ShapeError(std::string(op) + ": incompatible shapes " + a.shape_string() + " and " +
                   b.shape_string());
}

void axpy(DenseMatrix& y, const DenseMatrix& x) {
  auto yv = y.values();
  auto xv = x.values();
  for (std::size_t i = 0; i < yv.size(); ++i) yv[i] += xv[i];
}

template <typename F>
DenseMatrix map(const DenseMatrix& x, F f) {
  DenseMatrix out(x.rows(), x.cols());
  for (std::size_t i = 0; i < x.size(); ++i) out.values()[i] = f(x.values()[i]);
  return out;
}

double stable_sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

}  // namespace

Parameter::Parameter(std::string n, DenseMatrix v)
    : name(std::move(n)), value(std::move(v)), grad(value.rows(), value.cols()) {}

const DenseMatrix& Value::data() const { return tape_->node(*this).data; }
const DenseMatrix& Value::grad() const { return tape_->node(*this).grad; }

const Tape::Node& Tape::node(Value v) const {
  if (v.tape_ != this || v.id_ >= nodes_.size()) throw Error("value does not belong to this tape");
  return nodes_[v.id_];
}

Value Tape::constant(DenseMatrix data) {
  DenseMatrix grad(data.rows(), data.cols());
  nodes_.push_back(Node{"constant", std::move(data), std::move(grad), {}, {}, nullptr});
  return Value(this, nodes_.size() - 1);
}

Value Tape::parameter(Parameter& p) {
  if (auto it = parameter_ids_.find(&p); it != parameter_ids_.end()) return Value(this, it->second);
  if (!p.grad.same_shape(p.value)) p.grad = DenseMatrix(p.value.rows(), p.value.cols());
  nodes_.push_back(
      Node{"parameter", p.value, DenseMatrix(p.value.rows(), p.value.cols()), {}, {}, &p});
  parameter_ids_.emplace(&p, nodes_.size() - 1);
  return Value(this, nodes_.size() - 1);
}

Value Tape::record(std::string_view op, DenseMatrix data, std::vector<Value> inputs,
                   BackwardFn fn) {
  Node n;
  n.op = std::string(op);
  n.grad = DenseMatrix(data.rows(), data.cols());
  n.data = std::move(data);
  n.inputs.reserve(inputs.size());
  for (const Value& v : inputs) {
    if (v.tape_ != this) throw Error(std::string(op) + ": input belongs to another tape");
    n.inputs.push_back(v.id_);
  }
  n.backward = std::move(fn);
  nodes_.push_back(std::move(n));
  return Value(this, nodes_.size() - 1);
}

std::string_view Tape::op(Value v) const { return node(v).op; }
std::span<const std::size_t> Tape::inputs(Value v) const { return node(v).inputs; }

void Tape::backward(Value loss) {
  const Node& root = node(loss);
  if (root.data.rows() != 1 || root.data.cols() != 1) {
    throw ShapeError("backward: loss must be 1x1, got " + root.data.shape_string());
  }
  for (Node& n : nodes_) n.grad.fill(0.0);

  std::vector<char> reachable(nodes_.size(), 0);
  reachable[loss.id_] = 1;
  for (std::size_t i = loss.id_ + 1; i-- > 0;) {
    if (!reachable[i]) continue;
    for (std::size_t in : nodes_[i].inputs) reachable[in] = 1;
  }

  nodes_[loss.id_].grad(0, 0) = 1.0;
  std::vector<const DenseMatrix*> ins;
  std::vector<DenseMatrix*> in_grads;
  for (std::size_t i = loss.id_ + 1; i-- > 0;) {
    Node& n = nodes_[i];
    if (!reachable[i]) continue;
    if (n.parameter != nullptr) {
      axpy(n.parameter->grad, n.grad);
      continue;
    }
    if (!n.backward) continue;
    ins.clear();
    in_grads.clear();
    for (std::size_t in : n.inputs) {
      ins.push_back(&nodes_[in].data);
      in_grads.push_back(&nodes_[in].grad);
    }
    n.backward(BackwardContext{n.data, n.grad, ins, in_grads});
  }
}

Value matmul(Value a, Value b) {
  require_same_tape(a, b, "matmul");
  if (a.cols() != b.rows()) shape_mismatch("matmul", a.data(), b.data());
  return a.tape().record("matmul", kernels::matmul(a.data(), b.data()), {a, b},
                         [](const BackwardContext& c) {
                           kernels::gemm_nt(c.output_grad, *c.inputs[1], *c.input_grads[0], true);
                           kernels::gemm_tn(*c.inputs[0], c.output_grad, *c.input_grads[1], true);
                         });
}

Value add(Value a, Value b) {
  require_same_tape(a, b, "add");
  if (!a.data().same_shape(b.data())) shape_mismatch("add", a.data(), b.data());
  DenseMatrix out = a.data();
  axpy(out, b.data());
  return a.tape().record("add", std::move(out), {a, b}, [](const BackwardContext& c) {
    axpy(*c.input_grads[0], c.output_grad);
    axpy(*c.input_grads[1], c.output_grad);
  });
}

Value elementwise_mul(Value a, Value b) {
  require_same_tape(a, b, "elementwise_mul");
  if (!a.data().same_shape(b.data())) shape_mismatch("elementwise_mul", a.data(), b.data());
  DenseMatrix out = a.data();
  for (std::size_t i = 0; i < out.size(); ++i) out.values()[i] *= b.data().values()[i];
  return a.tape().record("elementwise_mul", std::move(out), {a, b}, [](const BackwardContext& c) {
    const auto g = c.output_grad.values();
    const auto x = c.inputs[0]->values();
    const auto y = c.inputs[1]->values();
    auto gx = c.input_grads[0]->values();
    auto gy = c.input_grads[1]->values();
    for (std::size_t i = 0; i < g.size(); ++i) {
      gx[i] += g[i] * y[i];
      gy[i] += g[i] * x[i];
    }
  });
}

Value scale(Value a, double factor) {
  return a.tape().record("scale", map(a.data(), [factor](double x) { return factor * x; }), {a},
                         [factor](const BackwardContext& c) {
                           auto gx = c.input_grads[0]->values();
                           const auto g = c.output_grad.values();
                           for (std::size_t i = 0; i < g.size(); ++i) gx[i] += factor * g[i];
                         });
}

Value relu(Value a) {
  return a.tape().record("relu", map(a.data(), [](double x) { return x > 0.0 ? x : 0.0; }), {a},
                         [](const BackwardContext& c) {
                           auto gx = c.input_grads[0]->values();
                           const auto x = c.inputs[0]->values();
                           const auto g = c.output_grad.values();
                           for (std::size_t i = 0; i < g.size(); ++i)
                             if (x[i] > 0.0) gx[i] += g[i];
                         });
}

Value sigmoid(Value a) {
  return a.tape().record("sigmoid", map(a.data(), stable_sigmoid), {a},
                         [](const BackwardContext& c) {
                           auto gx = c.input_grads[0]->values();
                           const auto y = c.output.values();
                           const auto g = c.output_grad.values();
                           for (std::size_t i = 0; i < g.size(); ++i)
                             gx[i] += g[i] * y[i] * (1.0 - y[i]);
                         });
}

Value tanh(Value a) {
  return a.tape().record("tanh", map(a.data(), [](double x) { return std::tanh(x); }), {a},
                         [](const BackwardContext& c) {
                           auto gx = c.input_grads[0]->values();
                           const auto y = c.output.values();
                           const auto g = c.output_grad.values();
                           for (std::size_t i = 0; i < g.size(); ++i)
                             gx[i] += g[i] * (1.0 - y[i] * y[i]);
                         });
}

Value transpose(Value a) {
  return a.tape().record("transpose", a.data().transposed(), {a}, [](const BackwardContext& c) {
    DenseMatrix& gx = *c.input_grads[0];
    for (std::size_t i = 0; i < gx.rows(); ++i)
      for (std::size_t j = 0; j < gx.cols(); ++j) gx(i, j) += c.output_grad(j, i);
  });
}

Value row_concat(std::span<const Value> parts) {
  if (parts.empty()) throw ShapeError("row_concat: no inputs");
  const std::size_t cols = parts.front().cols();
  std::size_t rows = 0;
  for (const Value& p : parts) {
    require_same_tape(parts.front(), p, "row_concat");
    if (p.cols() != cols) shape_mismatch("row_concat", parts.front().data(), p.data());
    rows += p.rows();
  }
  DenseMatrix out(rows, cols);
  std::size_t offset = 0;
  for (const Value& p : parts) {
    std::copy(p.data().values().begin(), p.data().values().end(),
              out.values().begin() + static_cast<std::ptrdiff_t>(offset * cols));
    offset += p.rows();
  }
  return parts.front().tape().record(
      "row_concat", std::move(out), std::vector<Value>(parts.begin(), parts.end()),
      [](const BackwardContext& c) {
        std::size_t offset = 0;
        for (DenseMatrix* g : c.input_grads) {
          const auto src = c.output_grad.values().subspan(offset, g->size());
          for (std::size_t i = 0; i < src.size(); ++i) g->values()[i] += src[i];
          offset += g->size();
        }
      });
}

Value scalar_sum(Value a) {
  double s = 0.0;
  for (double v : a.data().values()) s += v;
  return a.tape().record("scalar_sum", DenseMatrix(1, 1, s), {a}, [](const BackwardContext& c) {
    const double g = c.output_grad(0, 0);
    for (double& v : c.input_grads[0]->values()) v += g;
  });
}

Value softmax_over_rows(Value a) {
  const DenseMatrix& x = a.data();
  DenseMatrix out(x.rows(), x.cols());
  for (std::size_t i = 0; i < x.rows(); ++i) {
    const auto row = x.row(i);
    if (row.empty()) continue;
    const double mx = *std::max_element(row.begin(), row.end());
    double z = 0.0;
    for (std::size_t j = 0; j < row.size(); ++j) z += (out(i, j) = std::exp(row[j] - mx));
    for (double& v : out.row(i)) v /= z;
  }
  return a.tape().record("softmax_over_rows", std::move(out), {a}, [](const BackwardContext& c) {
    const DenseMatrix& y = c.output;
    DenseMatrix& gx = *c.input_grads[0];
    for (std::size_t i = 0; i < y.rows(); ++i) {
      double dot = 0.0;
      for (std::size_t j = 0; j < y.cols(); ++j) dot += c.output_grad(i, j) * y(i, j);
      for (std::size_t j = 0; j < y.cols(); ++j) gx(i, j) += y(i, j) * (c.output_grad(i, j) - dot);
    }
  });
}

Value diag_row_scale(Value z, Value weights) {
  require_same_tape(z, weights, "diag_row_scale");
  const DenseMatrix& w = weights.data();
  if (w.size() != z.rows() || (w.rows() != 1 && w.cols() != 1)) {
    shape_mismatch("diag_row_scale", z.data(), w);
  }
  DenseMatrix out = z.data();
  for (std::size_t i = 0; i < out.rows(); ++i)
    for (double& v : out.row(i)) v *= w.values()[i];
  return z.tape().record("diag_row_scale", std::move(out), {z, weights},
                         [](const BackwardContext& c) {
                           const DenseMatrix& zd = *c.inputs[0];
                           const auto wd = c.inputs[1]->values();
                           DenseMatrix& gz = *c.input_grads[0];
                           auto gw = c.input_grads[1]->values();
                           for (std::size_t i = 0; i < zd.rows(); ++i) {
                             double s = 0.0;
                             for (std::size_t j = 0; j < zd.cols(); ++j) {
                               gz(i, j) += wd[i] * c.output_grad(i, j);
                               s += zd(i, j) * c.output_grad(i, j);
                             }
                             gw[i] += s;
                           }
                         });
}

Value gather_rows(Value a, std::span<const std::size_t> rows) {
  const DenseMatrix& x = a.data();
  DenseMatrix out(rows.size(), x.cols());
  for (std::size_t p = 0; p < rows.size(); ++p) {
    if (rows[p] >= x.rows()) {
      throw ShapeError("gather_rows: row " + std::to_string(rows[p]) + " out of range for " +
                       x.shape_string());
    }
    std::copy(x.row(rows[p]).begin(), x.row(rows[p]).end(), out.row(p).begin());
  }
  std::vector<std::size_t> idx(rows.begin(), rows.end());
  return a.tape().record("gather_rows", std::move(out), {a},
                         [idx = std::move(idx)](const BackwardContext& c) {
                           DenseMatrix& gx = *c.input_grads[0];
                           for (std::size_t p = 0; p < idx.size(); ++p) {
                             auto dst = gx.row(idx[p]);
                             const auto src = c.output_grad.row(p);
                             for (std::size_t j = 0; j < dst.size(); ++j) dst[j] += src[j];
                           }
                         });
}

Value scatter_add_rows(Value base, Value src, std::span<const std::size_t> rows) {
  require_same_tape(base, src, "scatter_add_rows");
  if (src.cols() != base.cols() || src.rows() != rows.size()) {
    shape_mismatch("scatter_add_rows", base.data(), src.data());
  }
  DenseMatrix out = base.data();
  for (std::size_t p = 0; p < rows.size(); ++p) {
    if (rows[p] >= out.rows()) {
      throw ShapeError("scatter_add_rows: target row " + std::to_string(rows[p]) +
                       " out of range for " + out.shape_string());
    }
    auto dst = out.row(rows[p]);
    const auto s = src.data().row(p);
    for (std::size_t j = 0; j < dst.size(); ++j) dst[j] += s[j];
  }
  std::vector<std::size_t> idx(rows.begin(), rows.end());
  return base.tape().record("scatter_add_rows", std::move(out), {base, src},
                            [idx = std::move(idx)](const BackwardContext& c) {
                              axpy(*c.input_grads[0], c.output_grad);
                              DenseMatrix& gs = *c.input_grads[1];
                              for (std::size_t p = 0; p < idx.size(); ++p) {
                                auto dst = gs.row(p);
                                const auto g = c.output_grad.row(idx[p]);
                                for (std::size_t j = 0; j < dst.size(); ++j) dst[j] += g[j];
                              }
                            });
}

Value row_outer(Value a, Value b) {
  require_same_tape(a, b, "row_outer");
  if (a.rows() != b.rows()) shape_mismatch("row_outer", a.data(), b.data());
  return a.tape().record("row_outer", kernels::row_outer(a.data(), b.data()), {a, b},
                         [](const BackwardContext& c) {
                           const DenseMatrix& x = *c.inputs[0];
                           const DenseMatrix& y = *c.inputs[1];
                           DenseMatrix& gx = *c.input_grads[0];
                           DenseMatrix& gy = *c.input_grads[1];
                           const std::size_t dy = y.cols();
                           for (std::size_t p = 0; p < x.rows(); ++p)
                             for (std::size_t i = 0; i < x.cols(); ++i)
                               for (std::size_t j = 0; j < dy; ++j) {
                                 const double g = c.output_grad(p, i * dy + j);
                                 gx(p, i) += g * y(p, j);
                                 gy(p, j) += g * x(p, i);
                               }
                         });
}

GradCheckReport finite_difference_check(const LossFn& loss, std::span<Parameter* const> params,
                                        double h) {
  if (!(h > 0.0)) throw NumericError("finite_difference_check: step must be positive");
  auto evaluate = [&loss]() {
    Tape tape;
    const double v = loss(tape).data()(0, 0);
    if (!std::isfinite(v)) throw NumericError("finite_difference_check: loss is not finite");
    return v;
  };

  for (Parameter* p : params) p->grad = DenseMatrix(p->value.rows(), p->value.cols());
  {
    Tape tape;
    Value l = loss(tape);
    if (!std::isfinite(l.data()(0, 0))) {
      throw NumericError("finite_difference_check: loss is not finite");
    }
    tape.backward(l);
  }

  GradCheckReport report;
  for (Parameter* p : params) {
    const DenseMatrix analytic = p->grad;
    for (std::size_t i = 0; i < p->value.size(); ++i) {
      double& w = p->value.values()[i];
      const double original = w;
      w = original + h;
      const double plus = evaluate();
      w = original - h;
      const double minus = evaluate();
      w = original;
      const double numeric = (plus - minus) / (2.0 * h);
      const double a = analytic.values()[i];
      const double denom = std::max({std::abs(a), std::abs(numeric), 1e-12});
      const double rel = std::abs(a - numeric) / denom;
      ++report.entries_checked;
      if (rel > report.max_relative_error || report.entries_checked == 1) {
        report.max_relative_error = rel;
        report.worst_parameter = p->name;
        report.worst_index = i;
        report.analytic = a;
        report.numeric = numeric;
      }
    }
    p->zero_grad();
  }
  return report;
}

Adam::Adam(std::vector<Parameter*> params, AdamOptions options)
    : params_(std::move(params)), options_(options) {
  for (Parameter* p : params_) {
    first_.emplace_back(p->value.rows(), p->value.cols());
    second_.emplace_back(p->value.rows(), p->value.cols());
  }
}

void Adam::step() {
  if (params_.empty()) {
    std::cerr << "warning: adam step with no parameters; skipping\n";
    return;
  }
  ++steps_;
  const double b1 = options_.beta1;
  const double b2 = options_.beta2;
  const double c1 = 1.0 - std::pow(b1, static_cast<double>(steps_));
  const double c2 = 1.0 - std::pow(b2, static_cast<double>(steps_));
  for (std::size_t k = 0; k < params_.size(); ++k) {
    Parameter& p = *params_[k];
    auto w = p.value.values();
    auto g = p.grad.values();
    auto m = first_[k].values();
    auto v = second_[k].values();
    for (std::size_t i = 0; i < w.size(); ++i) {
      m[i] = b1 * m[i] + (1.0 - b1) * g[i];
      v[i] = b2 * v[i] + (1.0 - b2) * g[i] * g[i];
      const double m_hat = m[i] / c1;
      const double v_hat = v[i] / c2;
      w[i] -= options_.learning_rate * m_hat / (std::sqrt(v_hat) + options_.epsilon);
      g[i] = 0.0;
    }
  }
}

}  // namespace htgcn::ad
