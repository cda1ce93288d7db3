#include "msis/autodiff.hpp"

#include "eigen_view.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace msis {

// ---------------------------------------------------------------- ParamStore

Parameter& ParamStore::add(const std::string& name, Tensor2D init) {
  if (params_.count(name) != 0) throw ContractError("duplicate parameter name: " + name);
  Tensor2D grad(init.rows(), init.cols());
  auto [it, inserted] = params_.emplace(name, Parameter{std::move(init), std::move(grad)});
  return it->second;
}

Parameter& ParamStore::at(const std::string& name) {
  auto it = params_.find(name);
  if (it == params_.end()) throw std::out_of_range("unknown parameter: " + name);
  return it->second;
}

const Parameter& ParamStore::at(const std::string& name) const {
  auto it = params_.find(name);
  if (it == params_.end()) throw std::out_of_range("unknown parameter: " + name);
  return it->second;
}

std::vector<std::string> ParamStore::names() const {
  std::vector<std::string> out;
  out.reserve(params_.size());
  for (const auto& [name, p] : params_) out.push_back(name);
  return out;
}

std::size_t ParamStore::scalar_count() const {
  std::size_t n = 0;
  for (const auto& [name, p] : params_) n += p.value.size();
  return n;
}

void ParamStore::zero_grad() {
  for (auto& [name, p] : params_) p.grad.fill(0.0);
}

bool operator==(const ParamStore& a, const ParamStore& b) {
  if (a.params_.size() != b.params_.size()) return false;
  auto ib = b.params_.begin();
  for (const auto& [name, p] : a.params_) {
    if (name != ib->first || !(p.value == ib->second.value)) return false;
    ++ib;
  }
  return true;
}

// ---------------------------------------------------------------- Var / Tape

const Tensor2D& Var::value() const { return tape_->value(id_); }

Tensor2D Var::adjoint() const {
  if (tape_->has_adjoint(id_)) return tape_->nodes_[id_].adjoint;
  const Tensor2D& v = value();
  return Tensor2D(v.rows(), v.cols());
}

double Var::scalar() const {
  const Tensor2D& v = value();
  if (v.rows() != 1 || v.cols() != 1) {
    throw ContractError("scalar() on non-scalar node " + v.shape_string());
  }
  return v[0];
}

Var Tape::constant(Tensor2D value) { return push(std::move(value), nullptr); }

Var Tape::param(Parameter& p) {
  if (auto it = param_nodes_.find(&p); it != param_nodes_.end()) return Var(this, it->second);
  Var v = push(Tensor2D(), nullptr);
  nodes_[v.id()].param = &p;
  param_nodes_.emplace(&p, v.id());
  return v;
}

void Tape::backward(Var root) {
  if (!record_) throw ContractError("backward on a non-recording tape");
  if (root.valid() && &root.tape() != this) throw ContractError("backward root belongs to another tape");
  if (root.id() >= nodes_.size()) throw ContractError("backward root is not on this tape");
  const Tensor2D& rv = value(root.id());
  if (rv.rows() != 1 || rv.cols() != 1) {
    throw ContractError("backward root must be 1x1, got " + rv.shape_string());
  }
  if (swept_) throw ContractError("tape already swept; rebuild it per batch");
  swept_ = true;
  for (std::size_t i = 0; i <= root.id(); ++i) {
    const Tensor2D& v = value(i);
    nodes_[i].adjoint = Tensor2D(v.rows(), v.cols());
  }
  nodes_[root.id()].adjoint[0] = 1.0;
  for (std::size_t i = root.id() + 1; i-- > 0;) {
    Node& n = nodes_[i];
    if (n.backward) n.backward(*this, i);
    if (n.param != nullptr) {
      auto g = n.param->grad.values();
      auto a = n.adjoint.values();
      for (std::size_t k = 0; k < g.size(); ++k) g[k] += a[k];
    }
  }
}

// ---------------------------------------------------------------- operations

namespace {

Tape& same_tape(Var a, Var b, const char* op) {
  if (&a.tape() != &b.tape()) throw ContractError(std::string(op) + ": operands on different tapes");
  return a.tape();
}

void require_same_shape(const Tensor2D& a, const Tensor2D& b, const char* op) {
  if (!a.same_shape(b)) {
    throw DimensionError(std::string(op) + ": " + a.shape_string() + " vs " + b.shape_string());
  }
}

void require_column(const Tensor2D& a, std::size_t rows, const char* op) {
  if (a.cols() != 1 || a.rows() != rows) {
    throw DimensionError(std::string(op) + ": expected [" + std::to_string(rows) + "x1], got " +
                         a.shape_string());
  }
}

}  // namespace

Var dense(Var input, Var weight, Var bias) {
  Tape& t = same_tape(input, weight, "dense");
  same_tape(input, bias, "dense");
  const Tensor2D& b = bias.value();
  if (b.rows() != 1) throw DimensionError("dense: bias must be a row vector, got " + b.shape_string());
  Tensor2D out = dense_forward(input.value(), weight.value(), b.values());
  const std::size_t xi = input.id(), wi = weight.id(), bi = bias.id();
  return t.push(std::move(out), [xi, wi, bi](Tape& tp, std::size_t self) {
    const Tensor2D& g = tp.adjoint(self);
    const Tensor2D& x = tp.value(xi);
    const Tensor2D& w = tp.value(wi);
    as_matrix(tp.adjoint(xi)).noalias() += as_matrix(g) * as_matrix(w).transpose();
    as_matrix(tp.adjoint(wi)).noalias() += as_matrix(x).transpose() * as_matrix(g);
    as_matrix(tp.adjoint(bi)) += as_matrix(g).colwise().sum();
  });
}

Var relu(Var x) {
  Tape& t = x.tape();
  const Tensor2D& xv = x.value();
  Tensor2D out(xv.rows(), xv.cols());
  for (std::size_t i = 0; i < xv.size(); ++i) out[i] = xv[i] > 0.0 ? xv[i] : 0.0;
  const std::size_t xi = x.id();
  return t.push(std::move(out), [xi](Tape& tp, std::size_t self) {
    const Tensor2D& g = tp.adjoint(self);
    const Tensor2D& v = tp.value(xi);
    Tensor2D& gx = tp.adjoint(xi);
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (v[i] > 0.0) gx[i] += g[i];
    }
  });
}

Var sigmoid(Var x) {
  Tape& t = x.tape();
  Tensor2D out = sigmoid(x.value());
  const std::size_t xi = x.id();
  return t.push(std::move(out), [xi](Tape& tp, std::size_t self) {
    const Tensor2D& g = tp.adjoint(self);
    const Tensor2D& y = tp.value(self);
    Tensor2D& gx = tp.adjoint(xi);
    for (std::size_t i = 0; i < y.size(); ++i) {
      const double s = y[i];
      if (s <= kProbEpsilon || s >= 1.0 - kProbEpsilon) continue;
      gx[i] += g[i] * s * (1.0 - s);
    }
  });
}

Var add(Var a, Var b) {
  Tape& t = same_tape(a, b, "add");
  require_same_shape(a.value(), b.value(), "add");
  Tensor2D out = a.value();
  const Tensor2D& bv = b.value();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += bv[i];
  const std::size_t ai = a.id(), bi = b.id();
  return t.push(std::move(out), [ai, bi](Tape& tp, std::size_t self) {
    const Tensor2D& g = tp.adjoint(self);
    Tensor2D& ga = tp.adjoint(ai);
    for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i];
    Tensor2D& gb = tp.adjoint(bi);
    for (std::size_t i = 0; i < g.size(); ++i) gb[i] += g[i];
  });
}

Var mul(Var a, Var b) {
  Tape& t = same_tape(a, b, "mul");
  require_same_shape(a.value(), b.value(), "mul");
  Tensor2D out = a.value();
  const Tensor2D& bv = b.value();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] *= bv[i];
  const std::size_t ai = a.id(), bi = b.id();
  return t.push(std::move(out), [ai, bi](Tape& tp, std::size_t self) {
    const Tensor2D& g = tp.adjoint(self);
    const Tensor2D& av = tp.value(ai);
    const Tensor2D& bv2 = tp.value(bi);
    for (std::size_t i = 0; i < g.size(); ++i) tp.adjoint(ai)[i] += g[i] * bv2[i];
    for (std::size_t i = 0; i < g.size(); ++i) tp.adjoint(bi)[i] += g[i] * av[i];
  });
}

Var scale(Var a, double c) {
  Tape& t = a.tape();
  Tensor2D out = a.value();
  for (double& v : out.values()) v *= c;
  const std::size_t ai = a.id();
  return t.push(std::move(out), [ai, c](Tape& tp, std::size_t self) {
    const Tensor2D& g = tp.adjoint(self);
    Tensor2D& ga = tp.adjoint(ai);
    for (std::size_t i = 0; i < g.size(); ++i) ga[i] += c * g[i];
  });
}

Var row_dot(Var a, Var b) {
  Tape& t = same_tape(a, b, "row_dot");
  const Tensor2D& av = a.value();
  const Tensor2D& bv = b.value();
  require_same_shape(av, bv, "row_dot");
  Tensor2D out(av.rows(), 1);
  for (std::size_t i = 0; i < av.rows(); ++i) {
    double acc = 0.0;
    for (std::size_t j = 0; j < av.cols(); ++j) acc += av(i, j) * bv(i, j);
    out[i] = acc;
  }
  const std::size_t ai = a.id(), bi = b.id();
  return t.push(std::move(out), [ai, bi](Tape& tp, std::size_t self) {
    const Tensor2D& g = tp.adjoint(self);
    const Tensor2D& x = tp.value(ai);
    const Tensor2D& y = tp.value(bi);
    for (std::size_t i = 0; i < x.rows(); ++i) {
      for (std::size_t j = 0; j < x.cols(); ++j) {
        tp.adjoint(ai)(i, j) += g[i] * y(i, j);
        tp.adjoint(bi)(i, j) += g[i] * x(i, j);
      }
    }
  });
}

Var concat_cols(std::span<const Var> parts) {
  if (parts.empty()) throw DimensionError("concat_cols: no operands");
  Tape& t = parts.front().tape();
  const std::size_t rows = parts.front().rows();
  std::size_t cols = 0;
  std::vector<std::size_t> ids;
  std::vector<std::size_t> widths;
  for (const Var& p : parts) {
    same_tape(parts.front(), p, "concat_cols");
    if (p.rows() != rows) {
      throw DimensionError("concat_cols: row mismatch " + parts.front().value().shape_string() +
                           " vs " + p.value().shape_string());
    }
    ids.push_back(p.id());
    widths.push_back(p.cols());
    cols += p.cols();
  }
  Tensor2D out(rows, cols);
  std::size_t offset = 0;
  for (const Var& p : parts) {
    const Tensor2D& v = p.value();
    for (std::size_t i = 0; i < rows; ++i) {
      for (std::size_t j = 0; j < v.cols(); ++j) out(i, offset + j) = v(i, j);
    }
    offset += v.cols();
  }
  return t.push(std::move(out), [ids, widths](Tape& tp, std::size_t self) {
    const Tensor2D& g = tp.adjoint(self);
    std::size_t off = 0;
    for (std::size_t k = 0; k < ids.size(); ++k) {
      Tensor2D& gp = tp.adjoint(ids[k]);
      for (std::size_t i = 0; i < g.rows(); ++i) {
        for (std::size_t j = 0; j < widths[k]; ++j) gp(i, j) += g(i, off + j);
      }
      off += widths[k];
    }
  });
}

Var row_softmax(Var scores) {
  Tape& t = scores.tape();
  const Tensor2D& s = scores.value();
  if (s.cols() == 0) throw std::domain_error("row_softmax: empty score rows");
  Tensor2D out(s.rows(), s.cols());
  for (std::size_t i = 0; i < s.rows(); ++i) {
    const auto row = s.row(i);
    const double mx = *std::max_element(row.begin(), row.end());
    double total = 0.0;
    for (std::size_t j = 0; j < row.size(); ++j) {
      out(i, j) = std::exp(row[j] - mx);
      total += out(i, j);
    }
    for (std::size_t j = 0; j < row.size(); ++j) out(i, j) /= total;
  }
  const std::size_t si = scores.id();
  return t.push(std::move(out), [si](Tape& tp, std::size_t self) {
    const Tensor2D& g = tp.adjoint(self);
    const Tensor2D& y = tp.value(self);
    Tensor2D& gs = tp.adjoint(si);
    for (std::size_t i = 0; i < y.rows(); ++i) {
      double dot = 0.0;
      for (std::size_t j = 0; j < y.cols(); ++j) dot += g(i, j) * y(i, j);
      for (std::size_t j = 0; j < y.cols(); ++j) gs(i, j) += y(i, j) * (g(i, j) - dot);
    }
  });
}

Var column(Var a, std::size_t j) {
  Tape& t = a.tape();
  const Tensor2D& av = a.value();
  if (j >= av.cols()) throw DimensionError("column " + std::to_string(j) + " of " + av.shape_string());
  Tensor2D out(av.rows(), 1);
  for (std::size_t i = 0; i < av.rows(); ++i) out[i] = av(i, j);
  const std::size_t ai = a.id();
  return t.push(std::move(out), [ai, j](Tape& tp, std::size_t self) {
    const Tensor2D& g = tp.adjoint(self);
    Tensor2D& ga = tp.adjoint(ai);
    for (std::size_t i = 0; i < g.rows(); ++i) ga(i, j) += g[i];
  });
}

Var scale_rows(Var a, Var w) {
  Tape& t = same_tape(a, w, "scale_rows");
  const Tensor2D& av = a.value();
  require_column(w.value(), av.rows(), "scale_rows");
  const Tensor2D& wv = w.value();
  Tensor2D out = av;
  for (std::size_t i = 0; i < av.rows(); ++i) {
    for (std::size_t j = 0; j < av.cols(); ++j) out(i, j) *= wv[i];
  }
  const std::size_t ai = a.id(), wi = w.id();
  return t.push(std::move(out), [ai, wi](Tape& tp, std::size_t self) {
    const Tensor2D& g = tp.adjoint(self);
    const Tensor2D& x = tp.value(ai);
    const Tensor2D& s = tp.value(wi);
    for (std::size_t i = 0; i < x.rows(); ++i) {
      double acc = 0.0;
      for (std::size_t j = 0; j < x.cols(); ++j) {
        tp.adjoint(ai)(i, j) += g(i, j) * s[i];
        acc += g(i, j) * x(i, j);
      }
      tp.adjoint(wi)[i] += acc;
    }
  });
}

Var sum(Var a) {
  Tape& t = a.tape();
  double total = 0.0;
  for (double v : a.value().values()) total += v;
  const std::size_t ai = a.id();
  return t.push(Tensor2D(1, 1, total), [ai](Tape& tp, std::size_t self) {
    const double g = tp.adjoint(self)[0];
    for (double& v : tp.adjoint(ai).values()) v += g;
  });
}

Var weighted_sum(std::span<const Var> scalars, std::span<const double> weights) {
  if (scalars.size() != weights.size()) {
    throw DimensionError("weighted_sum: " + std::to_string(scalars.size()) + " terms, " +
                         std::to_string(weights.size()) + " weights");
  }
  if (scalars.empty()) throw DimensionError("weighted_sum: no terms");
  Tape& t = scalars.front().tape();
  double total = 0.0;
  std::vector<std::size_t> ids;
  for (std::size_t k = 0; k < scalars.size(); ++k) {
    same_tape(scalars.front(), scalars[k], "weighted_sum");
    total += weights[k] * scalars[k].scalar();
    ids.push_back(scalars[k].id());
  }
  std::vector<double> w(weights.begin(), weights.end());
  return t.push(Tensor2D(1, 1, total), [ids, w](Tape& tp, std::size_t self) {
    const double g = tp.adjoint(self)[0];
    for (std::size_t k = 0; k < ids.size(); ++k) tp.adjoint(ids[k])[0] += w[k] * g;
  });
}

double label_poison() noexcept { return std::numeric_limits<double>::quiet_NaN(); }

namespace {

double clamp_prob(double p) { return std::clamp(p, kProbEpsilon, 1.0 - kProbEpsilon); }

}  // namespace

Var masked_bce(Var probs, std::span<const double> labels, std::span<const double> mask) {
  Tape& t = probs.tape();
  const Tensor2D& p = probs.value();
  require_column(p, labels.size(), "masked_bce");
  if (mask.size() != labels.size()) throw DimensionError("masked_bce: mask/label length mismatch");
  std::vector<std::size_t> rows;
  std::vector<double> ys;
  double total = 0.0;
  for (std::size_t i = 0; i < mask.size(); ++i) {
    if (mask[i] == 0.0) continue;
    const double y = labels[i];
    if (std::isnan(y)) throw ContractError("masked_bce: poisoned label consumed at row " + std::to_string(i));
    const double pi = clamp_prob(p[i]);
    total -= y * std::log(pi) + (1.0 - y) * std::log(1.0 - pi);
    rows.push_back(i);
    ys.push_back(y);
  }
  if (rows.empty()) return t.constant(Tensor2D(1, 1, 0.0));
  const double inv_n = 1.0 / static_cast<double>(rows.size());
  const std::size_t pid = probs.id();
  return t.push(Tensor2D(1, 1, total * inv_n),
                [pid, rows = std::move(rows), ys = std::move(ys), inv_n](Tape& tp, std::size_t self) {
                  const double g = tp.adjoint(self)[0] * inv_n;
                  const Tensor2D& pv = tp.value(pid);
                  Tensor2D& gp = tp.adjoint(pid);
                  for (std::size_t k = 0; k < rows.size(); ++k) {
                    const double pi = clamp_prob(pv[rows[k]]);
                    gp[rows[k]] += g * (-ys[k] / pi + (1.0 - ys[k]) / (1.0 - pi));
                  }
                });
}

Var entropy_regularizer(Var probs, std::span<const double> mask, Reduction reduction) {
  Tape& t = probs.tape();
  const Tensor2D& p = probs.value();
  require_column(p, mask.size(), "entropy_regularizer");
  std::vector<std::size_t> rows;
  double total = 0.0;
  for (std::size_t i = 0; i < mask.size(); ++i) {
    if (mask[i] != 0.0) continue;
    const double pi = clamp_prob(p[i]);
    total -= pi * std::log(pi) + (1.0 - pi) * std::log(1.0 - pi);
    rows.push_back(i);
  }
  if (rows.empty()) return t.constant(Tensor2D(1, 1, 0.0));
  const double factor = reduction == Reduction::kMean ? 1.0 / static_cast<double>(rows.size()) : 1.0;
  const std::size_t pid = probs.id();
  return t.push(Tensor2D(1, 1, total * factor),
                [pid, rows = std::move(rows), factor](Tape& tp, std::size_t self) {
                  const double g = tp.adjoint(self)[0] * factor;
                  const Tensor2D& pv = tp.value(pid);
                  Tensor2D& gp = tp.adjoint(pid);
                  for (std::size_t r : rows) {
                    const double pi = clamp_prob(pv[r]);
                    gp[r] += g * std::log((1.0 - pi) / pi);
                  }
                });
}

}  // namespace msis
