#include "dualseq/autodiff/graph.hpp"

#include <cmath>

#include <fmt/format.h>

#include "dualseq/errors.hpp"

namespace dualseq::ad {

const char* op_name(OpKind kind) {
  switch (kind) {
    case OpKind::Parameter: return "parameter";
    case OpKind::Constant: return "constant";
    case OpKind::MatMul: return "matmul";
    case OpKind::Add: return "add";
    case OpKind::Sub: return "sub";
    case OpKind::Mul: return "mul";
    case OpKind::Sigmoid: return "sigmoid";
    case OpKind::Tanh: return "tanh";
    case OpKind::Concat: return "concat";
    case OpKind::AddBias: return "add_bias";
    case OpKind::Gather: return "gather_rows";
    case OpKind::Where: return "where_rows";
    case OpKind::RowStack: return "row_stack";
    case OpKind::SumSquaredDiff: return "sum_squared_diff";
    case OpKind::CrossEntropy: return "cross_entropy";
  }
  return "?";
}

const Tensor& Var::value() const { return graph->value(*this); }

namespace {

// C[m x n] = A[m x k] * B[k x n]; accumulates over k in increasing order.
void gemm_nn(const double* a, const double* b, double* c, std::size_t m, std::size_t k, std::size_t n) {
  for (std::size_t i = 0; i < m; ++i) {
    double* crow = c + i * n;
    for (std::size_t j = 0; j < n; ++j) crow[j] = 0.0;
    const double* arow = a + i * k;
    for (std::size_t p = 0; p < k; ++p) {
      const double av = arow[p];
      const double* brow = b + p * n;
      for (std::size_t j = 0; j < n; ++j) crow[j] += av * brow[j];
    }
  }
}

// C[m x k] += G[m x n] * B[k x n]^T
void gemm_nt_acc(const double* g, const double* b, double* c, std::size_t m, std::size_t k, std::size_t n) {
  std::vector<double> bt(n * k);
  for (std::size_t p = 0; p < k; ++p)
    for (std::size_t j = 0; j < n; ++j) bt[j * k + p] = b[p * n + j];
  for (std::size_t i = 0; i < m; ++i) {
    double* crow = c + i * k;
    const double* grow = g + i * n;
    for (std::size_t j = 0; j < n; ++j) {
      const double gv = grow[j];
      const double* btrow = bt.data() + j * k;
      for (std::size_t p = 0; p < k; ++p) crow[p] += gv * btrow[p];
    }
  }
}

// C[k x n] += A[m x k]^T * G[m x n]
void gemm_tn_acc(const double* a, const double* g, double* c, std::size_t m, std::size_t k, std::size_t n) {
  for (std::size_t i = 0; i < m; ++i) {
    const double* arow = a + i * k;
    const double* grow = g + i * n;
    for (std::size_t p = 0; p < k; ++p) {
      const double av = arow[p];
      double* crow = c + p * n;
      for (std::size_t j = 0; j < n; ++j) crow[j] += av * grow[j];
    }
  }
}

double stable_sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

Graph& graph_of(Var a) {
  if (a.graph == nullptr) throw ContractError("operand is not attached to a graph");
  return *a.graph;
}

Graph& same_graph(Var a, Var b) {
  auto& g = graph_of(a);
  if (b.graph != a.graph) throw ContractError("operands belong to different graphs");
  return g;
}

enum class Broadcast { None, ScalarA, ScalarB };

Broadcast binary_layout(const char* op, const Tensor& a, const Tensor& b) {
  if (a.shape() == b.shape()) return Broadcast::None;
  if (b.is_scalar()) return Broadcast::ScalarB;
  if (a.is_scalar()) return Broadcast::ScalarA;
  throw DimensionError(fmt::format("{}: shape mismatch {} vs {}", op, shape_string(a.shape()), shape_string(b.shape())));
}

template <typename F>
Tensor binary_values(const Tensor& a, const Tensor& b, Broadcast layout, F f) {
  Tensor out(layout == Broadcast::ScalarA ? b.shape() : a.shape());
  const std::size_t n = out.size();
  for (std::size_t i = 0; i < n; ++i) {
    const double x = layout == Broadcast::ScalarA ? a[0] : a[i];
    const double y = layout == Broadcast::ScalarB ? b[0] : b[i];
    out[i] = f(x, y);
  }
  return out;
}

// Adds scale * g (elementwise, scalar-aware) into slot.
void accumulate(Tensor& slot, const Tensor& g, double scale = 1.0) {
  if (slot.size() == g.size()) {
    for (std::size_t i = 0; i < g.size(); ++i) slot[i] += scale * g[i];
  } else {
    double s = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) s += g[i];
    slot[0] += scale * s;
  }
}

}  // namespace

// ---- graph bookkeeping ------------------------------------------------------

Var Graph::push(Node node) {
  nodes_.push_back(std::move(node));
  return Var{this, nodes_.size() - 1};
}

Graph::Node& Graph::node(Var v) {
  if (v.graph != this || v.id >= nodes_.size()) throw ContractError("variable does not belong to this graph");
  return nodes_[v.id];
}

const Graph::Node& Graph::node(Var v) const {
  if (v.graph != this || v.id >= nodes_.size()) throw ContractError("variable does not belong to this graph");
  return nodes_[v.id];
}

Var Graph::param(Parameter& p) {
  if (auto it = bound_.find(&p); it != bound_.end()) return Var{this, it->second};
  Node n{OpKind::Parameter, {}, p.value};
  n.param = &p;
  auto v = push(std::move(n));
  bound_.emplace(&p, v.id);
  return v;
}

Var Graph::constant(Tensor value) { return push(Node{OpKind::Constant, {}, std::move(value)}); }

Var Graph::frozen(const Parameter& p) {
  if (auto it = frozen_.find(&p); it != frozen_.end()) return Var{this, it->second};
  auto v = constant(p.value);
  frozen_.emplace(&p, v.id);
  return v;
}

const Tensor& Graph::value(Var v) const { return node(v).value; }

Tensor Graph::grad(Var v) const {
  const auto& n = node(v);
  return n.has_grad ? n.grad : Tensor(n.value.shape(), 0.0);
}

OpKind Graph::kind(Var v) const { return node(v).kind; }

std::span<const std::size_t> Graph::inputs(Var v) const { return node(v).inputs; }

Tensor& Graph::grad_slot(std::size_t id) {
  auto& n = nodes_[id];
  if (!n.has_grad) {
    n.grad = Tensor(n.value.shape(), 0.0);
    n.has_grad = true;
  }
  return n.grad;
}

void Graph::backward(Var loss) {
  const auto& root = node(loss);
  if (!root.value.is_scalar()) {
    throw ContractError("backward: loss must be a scalar, got shape " + shape_string(root.value.shape()));
  }
  for (auto& n : nodes_) {
    n.has_grad = false;
    n.grad = Tensor();
  }
  grad_slot(loss.id)[0] = 1.0;
  for (std::size_t id = loss.id + 1; id-- > 0;) {
    if (nodes_[id].has_grad) propagate(id);
  }
  for (auto& n : nodes_) {
    if (n.kind != OpKind::Parameter || !n.has_grad) continue;
    auto& target = n.param->grad;
    if (target.shape() != n.value.shape()) target = Tensor(n.value.shape(), 0.0);
    for (std::size_t i = 0; i < target.size(); ++i) target[i] += n.grad[i];
  }
}

void Graph::propagate(std::size_t id) {
  // No nodes are pushed during backward, so references into nodes_ stay valid.
  Node& n = nodes_[id];
  const Tensor& g = n.grad;
  switch (n.kind) {
    case OpKind::Parameter:
    case OpKind::Constant:
      return;
    case OpKind::MatMul: {
      const Tensor& a = nodes_[n.inputs[0]].value;
      const Tensor& b = nodes_[n.inputs[1]].value;
      const auto m = a.rows(), k = a.cols(), cols = b.cols();
      gemm_nt_acc(g.data().data(), b.data().data(), grad_slot(n.inputs[0]).data().data(), m, k, cols);
      gemm_tn_acc(a.data().data(), g.data().data(), grad_slot(n.inputs[1]).data().data(), m, k, cols);
      return;
    }
    case OpKind::Add:
      accumulate(grad_slot(n.inputs[0]), g);
      accumulate(grad_slot(n.inputs[1]), g);
      return;
    case OpKind::Sub:
      accumulate(grad_slot(n.inputs[0]), g);
      accumulate(grad_slot(n.inputs[1]), g, -1.0);
      return;
    case OpKind::Mul: {
      const Tensor& a = nodes_[n.inputs[0]].value;
      const Tensor& b = nodes_[n.inputs[1]].value;
      auto layout = binary_layout("mul", a, b);
      Tensor ga = binary_values(g, b, layout == Broadcast::ScalarB ? Broadcast::ScalarB : Broadcast::None,
                                [](double x, double y) { return x * y; });
      Tensor gb = binary_values(g, a, layout == Broadcast::ScalarA ? Broadcast::ScalarB : Broadcast::None,
                                [](double x, double y) { return x * y; });
      accumulate(grad_slot(n.inputs[0]), ga);
      accumulate(grad_slot(n.inputs[1]), gb);
      return;
    }
    case OpKind::Sigmoid: {
      auto& ga = grad_slot(n.inputs[0]);
      for (std::size_t i = 0; i < g.size(); ++i) {
        const double y = n.value[i];
        ga[i] += g[i] * y * (1.0 - y);
      }
      return;
    }
    case OpKind::Tanh: {
      auto& ga = grad_slot(n.inputs[0]);
      for (std::size_t i = 0; i < g.size(); ++i) {
        const double y = n.value[i];
        ga[i] += g[i] * (1.0 - y * y);
      }
      return;
    }
    case OpKind::Concat: {
      auto& ga = grad_slot(n.inputs[0]);
      auto& gb = grad_slot(n.inputs[1]);
      const auto rows = n.value.rows(), ca = ga.cols(), cb = gb.cols(), c = n.value.cols();
      for (std::size_t r = 0; r < rows; ++r) {
        for (std::size_t j = 0; j < ca; ++j) ga[r * ca + j] += g[r * c + j];
        for (std::size_t j = 0; j < cb; ++j) gb[r * cb + j] += g[r * c + ca + j];
      }
      return;
    }
    case OpKind::AddBias: {
      auto& ga = grad_slot(n.inputs[0]);
      auto& gb = grad_slot(n.inputs[1]);
      const auto rows = g.rows(), c = g.cols();
      for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i];
      for (std::size_t r = 0; r < rows; ++r)
        for (std::size_t j = 0; j < c; ++j) gb[j] += g[r * c + j];
      return;
    }
    case OpKind::Gather: {
      auto& gt = grad_slot(n.inputs[0]);
      const auto c = g.cols();
      for (std::size_t r = 0; r < n.indices.size(); ++r) {
        double* row = gt.data().data() + static_cast<std::size_t>(n.indices[r]) * c;
        for (std::size_t j = 0; j < c; ++j) row[j] += g[r * c + j];
      }
      return;
    }
    case OpKind::Where: {
      auto& ga = grad_slot(n.inputs[0]);
      auto& gb = grad_slot(n.inputs[1]);
      const auto c = g.cols();
      for (std::size_t r = 0; r < n.indices.size(); ++r) {
        auto& dst = n.indices[r] ? ga : gb;
        for (std::size_t j = 0; j < c; ++j) dst[r * c + j] += g[r * c + j];
      }
      return;
    }
    case OpKind::RowStack: {
      std::size_t offset = 0;
      for (auto in : n.inputs) {
        auto& gi = grad_slot(in);
        for (std::size_t i = 0; i < gi.size(); ++i) gi[i] += g[offset + i];
        offset += gi.size();
      }
      return;
    }
    case OpKind::SumSquaredDiff: {
      const Tensor& a = nodes_[n.inputs[0]].value;
      const Tensor& b = nodes_[n.inputs[1]].value;
      const double scale = 2.0 * g[0] / static_cast<double>(a.rank() == 2 ? a.rows() : 1);
      auto& ga = grad_slot(n.inputs[0]);
      auto& gb = grad_slot(n.inputs[1]);
      for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = scale * (a[i] - b[i]);
        ga[i] += d;
        gb[i] -= d;
      }
      return;
    }
    case OpKind::CrossEntropy: {
      // saved = [softmax rows (R*V) | mask (R)], saved back-to-back.
      auto& gl = grad_slot(n.inputs[0]);
      const auto rows = gl.rows(), v = gl.cols();
      const double* probs = n.saved.data();
      const double* mask = n.saved.data() + rows * v;
      double total = 0.0;
      for (std::size_t r = 0; r < rows; ++r) total += mask[r];
      for (std::size_t r = 0; r < rows; ++r) {
        if (mask[r] == 0.0) continue;
        const double w = g[0] * mask[r] / total;
        double* grow = gl.data().data() + r * v;
        const double* prow = probs + r * v;
        for (std::size_t j = 0; j < v; ++j) grow[j] += w * prow[j];
        grow[static_cast<std::size_t>(n.indices[r])] -= w;
      }
      return;
    }
  }
}

// ---- operations -------------------------------------------------------------

Var matmul(Var av, Var bv) {
  auto& g = same_graph(av, bv);
  const Tensor& a = g.value(av);
  const Tensor& b = g.value(bv);
  if (a.rank() != 2 || b.rank() != 2 || a.cols() != b.rows()) {
    throw DimensionError(
        fmt::format("matmul: incompatible shapes {} and {}", shape_string(a.shape()), shape_string(b.shape())));
  }
  Tensor out(Shape{a.rows(), b.cols()});
  gemm_nn(a.data().data(), b.data().data(), out.data().data(), a.rows(), a.cols(), b.cols());
  return g.push(Graph::Node{OpKind::MatMul, {av.id, bv.id}, std::move(out)});
}

Var add(Var av, Var bv) {
  auto& g = same_graph(av, bv);
  const Tensor& a = g.value(av);
  const Tensor& b = g.value(bv);
  auto out = binary_values(a, b, binary_layout("add", a, b), [](double x, double y) { return x + y; });
  return g.push(Graph::Node{OpKind::Add, {av.id, bv.id}, std::move(out)});
}

Var sub(Var av, Var bv) {
  auto& g = same_graph(av, bv);
  const Tensor& a = g.value(av);
  const Tensor& b = g.value(bv);
  auto out = binary_values(a, b, binary_layout("sub", a, b), [](double x, double y) { return x - y; });
  return g.push(Graph::Node{OpKind::Sub, {av.id, bv.id}, std::move(out)});
}

Var mul(Var av, Var bv) {
  auto& g = same_graph(av, bv);
  const Tensor& a = g.value(av);
  const Tensor& b = g.value(bv);
  auto out = binary_values(a, b, binary_layout("mul", a, b), [](double x, double y) { return x * y; });
  return g.push(Graph::Node{OpKind::Mul, {av.id, bv.id}, std::move(out)});
}

Var sigmoid(Var av) {
  auto& g = graph_of(av);
  Tensor out = g.value(av);
  for (auto& x : out.data()) x = stable_sigmoid(x);
  return g.push(Graph::Node{OpKind::Sigmoid, {av.id}, std::move(out)});
}

Var tanh(Var av) {
  auto& g = graph_of(av);
  Tensor out = g.value(av);
  for (auto& x : out.data()) x = std::tanh(x);
  return g.push(Graph::Node{OpKind::Tanh, {av.id}, std::move(out)});
}

Var elementwise(Elementwise op, Var a, std::optional<Var> b) {
  const bool binary = op == Elementwise::Add || op == Elementwise::Sub || op == Elementwise::Mul;
  if (binary != b.has_value()) throw ContractError("elementwise: operand count does not match op");
  switch (op) {
    case Elementwise::Add: return add(a, *b);
    case Elementwise::Sub: return sub(a, *b);
    case Elementwise::Mul: return mul(a, *b);
    case Elementwise::Sigmoid: return sigmoid(a);
    case Elementwise::Tanh: return tanh(a);
  }
  throw ContractError("elementwise: unknown op");
}

Var concat(Var av, Var bv) {
  auto& g = same_graph(av, bv);
  const Tensor& a = g.value(av);
  const Tensor& b = g.value(bv);
  if (a.rank() != b.rank() || a.rank() > 2 || a.rows() != b.rows()) {
    throw DimensionError(
        fmt::format("concat: incompatible shapes {} and {}", shape_string(a.shape()), shape_string(b.shape())));
  }
  const auto rows = a.rows(), ca = a.cols(), cb = b.cols();
  Tensor out(a.rank() == 2 ? Shape{rows, ca + cb} : Shape{ca + cb});
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t j = 0; j < ca; ++j) out[r * (ca + cb) + j] = a[r * ca + j];
    for (std::size_t j = 0; j < cb; ++j) out[r * (ca + cb) + ca + j] = b[r * cb + j];
  }
  return g.push(Graph::Node{OpKind::Concat, {av.id, bv.id}, std::move(out)});
}

Var add_bias(Var av, Var biasv) {
  auto& g = same_graph(av, biasv);
  const Tensor& a = g.value(av);
  const Tensor& bias = g.value(biasv);
  if (bias.rank() != 1 || bias.size() != a.cols()) {
    throw DimensionError(
        fmt::format("add_bias: bias {} does not match {}", shape_string(bias.shape()), shape_string(a.shape())));
  }
  Tensor out = a;
  const auto c = a.cols();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += bias[i % c];
  return g.push(Graph::Node{OpKind::AddBias, {av.id, biasv.id}, std::move(out)});
}

Var gather_rows(Var tablev, std::span<const TokenId> ids) {
  auto& g = graph_of(tablev);
  const Tensor& table = g.value(tablev);
  if (table.rank() != 2) throw DimensionError("gather_rows: table must be rank 2, got " + shape_string(table.shape()));
  if (ids.empty()) throw ContractError("gather_rows: no ids");
  const auto c = table.cols();
  Tensor out(Shape{ids.size(), c});
  for (std::size_t r = 0; r < ids.size(); ++r) {
    if (ids[r] < 0 || static_cast<std::size_t>(ids[r]) >= table.rows()) {
      throw IndexError(fmt::format("gather_rows: id {} outside [0, {})", ids[r], table.rows()));
    }
    const auto src = static_cast<std::size_t>(ids[r]) * c;
    for (std::size_t j = 0; j < c; ++j) out[r * c + j] = table[src + j];
  }
  Graph::Node n{OpKind::Gather, {tablev.id}, std::move(out)};
  n.indices.assign(ids.begin(), ids.end());
  return g.push(std::move(n));
}

Var where_rows(std::span<const std::uint8_t> mask, Var av, Var bv) {
  auto& g = same_graph(av, bv);
  const Tensor& a = g.value(av);
  const Tensor& b = g.value(bv);
  if (a.shape() != b.shape() || mask.size() != a.rows()) {
    throw DimensionError(fmt::format("where_rows: shapes {} / {} with {} mask rows", shape_string(a.shape()),
                                     shape_string(b.shape()), mask.size()));
  }
  Tensor out = b;
  const auto c = a.cols();
  for (std::size_t r = 0; r < mask.size(); ++r) {
    if (!mask[r]) continue;
    for (std::size_t j = 0; j < c; ++j) out[r * c + j] = a[r * c + j];
  }
  Graph::Node n{OpKind::Where, {av.id, bv.id}, std::move(out)};
  n.indices.assign(mask.begin(), mask.end());
  return g.push(std::move(n));
}

Var row_stack(std::span<const Var> parts) {
  if (parts.empty()) throw ContractError("row_stack: no parts");
  auto& g = graph_of(parts[0]);
  const auto c = g.value(parts[0]).cols();
  std::size_t rows = 0;
  std::vector<std::size_t> ids;
  for (auto p : parts) {
    if (p.graph != &g) throw ContractError("operands belong to different graphs");
    const Tensor& t = g.value(p);
    if (t.rank() != 2 || t.cols() != c) {
      throw DimensionError(fmt::format("row_stack: part {} does not have {} columns", shape_string(t.shape()), c));
    }
    rows += t.rows();
    ids.push_back(p.id);
  }
  Tensor out(Shape{rows, c});
  std::size_t offset = 0;
  for (auto p : parts) {
    const Tensor& t = g.value(p);
    std::copy(t.data().begin(), t.data().end(), out.data().begin() + static_cast<std::ptrdiff_t>(offset));
    offset += t.size();
  }
  return g.push(Graph::Node{OpKind::RowStack, std::move(ids), std::move(out)});
}

Var sum_squared_diff(Var av, Var bv) {
  auto& g = same_graph(av, bv);
  const Tensor& a = g.value(av);
  const Tensor& b = g.value(bv);
  if (a.shape() != b.shape()) {
    throw DimensionError(
        fmt::format("sum_squared_diff: shape mismatch {} vs {}", shape_string(a.shape()), shape_string(b.shape())));
  }
  const auto rows = a.rank() == 2 ? a.rows() : 1;
  const auto c = a.size() / rows;
  double total = 0.0;
  for (std::size_t r = 0; r < rows; ++r) {
    double row = 0.0;
    for (std::size_t j = 0; j < c; ++j) {
      const double d = a[r * c + j] - b[r * c + j];
      row += d * d;
    }
    total += row;
  }
  return g.push(Graph::Node{OpKind::SumSquaredDiff, {av.id, bv.id}, Tensor::scalar(total / static_cast<double>(rows))});
}

Var cross_entropy(Var logitsv, std::span<const TokenId> targets, std::span<const double> mask) {
  auto& g = graph_of(logitsv);
  const Tensor& logits = g.value(logitsv);
  if (logits.rank() != 2) throw DimensionError("cross_entropy: logits must be rank 2");
  const auto rows = logits.rows(), v = logits.cols();
  if (targets.size() != rows || mask.size() != rows) {
    throw DimensionError(fmt::format("cross_entropy: {} logit rows, {} targets, {} mask entries", rows, targets.size(),
                                     mask.size()));
  }
  double count = 0.0;
  for (double m : mask) count += m;
  if (count == 0.0) throw ContractError("cross_entropy: every step is masked (N = 0)");

  std::vector<double> saved(rows * v + rows);
  double total = 0.0;
  for (std::size_t r = 0; r < rows; ++r) {
    if (targets[r] < 0 || static_cast<std::size_t>(targets[r]) >= v) {
      throw IndexError(fmt::format("cross_entropy: target {} outside [0, {})", targets[r], v));
    }
    const double* row = logits.data().data() + r * v;
    double mx = row[0];
    for (std::size_t j = 1; j < v; ++j) mx = std::max(mx, row[j]);
    double z = 0.0;
    for (std::size_t j = 0; j < v; ++j) z += std::exp(row[j] - mx);
    double* prob = saved.data() + r * v;
    for (std::size_t j = 0; j < v; ++j) prob[j] = std::exp(row[j] - mx) / z;
    saved[rows * v + r] = mask[r];
    if (mask[r] != 0.0) total += mask[r] * (std::log(z) + mx - row[static_cast<std::size_t>(targets[r])]);
  }
  Graph::Node n{OpKind::CrossEntropy, {logitsv.id}, Tensor::scalar(total / count)};
  n.indices.assign(targets.begin(), targets.end());
  n.saved = std::move(saved);
  return g.push(std::move(n));
}

}  // namespace dualseq::ad
