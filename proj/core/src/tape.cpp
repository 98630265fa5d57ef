#include "specfilt/tape.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "specfilt/errors.hpp"

namespace specfilt {

int Tape::push(Node n) {
  n.grad = Tensor(n.val.rows, n.val.cols);
  nodes_.push_back(std::move(n));
  return static_cast<int>(nodes_.size()) - 1;
}

int Tape::input(Tensor t) {
  Node n;
  n.op = Op::Input;
  n.val = std::move(t);
  return push(std::move(n));
}

namespace {
void require_same_shape(const Tensor& a, const Tensor& b, const char* op) {
  if (a.rows != b.rows || a.cols != b.cols)
    throw std::invalid_argument(std::string(op) + ": shape mismatch");
}
}  // namespace

int Tape::add(int a, int b) {
  Node n;
  n.op = Op::Add;
  n.a = a;
  n.b = b;
  require_same_shape(nodes_[a].val, nodes_[b].val, "add");
  n.val = nodes_[a].val;
  for (std::size_t i = 0; i < n.val.size(); ++i) n.val.v[i] += nodes_[b].val.v[i];
  return push(std::move(n));
}

int Tape::sub(int a, int b) {
  Node n;
  n.op = Op::Sub;
  n.a = a;
  n.b = b;
  require_same_shape(nodes_[a].val, nodes_[b].val, "sub");
  n.val = nodes_[a].val;
  for (std::size_t i = 0; i < n.val.size(); ++i) n.val.v[i] -= nodes_[b].val.v[i];
  return push(std::move(n));
}

int Tape::hadamard(int a, int b) {
  Node n;
  n.op = Op::Hadamard;
  n.a = a;
  n.b = b;
  require_same_shape(nodes_[a].val, nodes_[b].val, "hadamard");
  n.val = nodes_[a].val;
  for (std::size_t i = 0; i < n.val.size(); ++i) n.val.v[i] *= nodes_[b].val.v[i];
  return push(std::move(n));
}

int Tape::scale(int t, int s) {
  if (nodes_[s].val.size() != 1) throw std::invalid_argument("scale: scalar operand required");
  Node n;
  n.op = Op::Scale;
  n.a = t;
  n.b = s;
  n.val = nodes_[t].val;
  const double sv = nodes_[s].val.v[0];
  for (double& x : n.val.v) x *= sv;
  return push(std::move(n));
}

int Tape::scale_const(int t, double c) {
  Node n;
  n.op = Op::ScaleConst;
  n.a = t;
  n.cval = c;
  n.val = nodes_[t].val;
  for (double& x : n.val.v) x *= c;
  return push(std::move(n));
}

int Tape::dot(int a, int b) {
  Node n;
  n.op = Op::Dot;
  n.a = a;
  n.b = b;
  require_same_shape(nodes_[a].val, nodes_[b].val, "dot");
  double s = 0.0;
  for (std::size_t i = 0; i < nodes_[a].val.size(); ++i) s += nodes_[a].val.v[i] * nodes_[b].val.v[i];
  n.val = Tensor::scalar(s);
  return push(std::move(n));
}

int Tape::norm(int a) {
  Node n;
  n.op = Op::Norm;
  n.a = a;
  double s = 0.0;
  for (double x : nodes_[a].val.v) s += x * x;
  n.val = Tensor::scalar(std::sqrt(s));
  return push(std::move(n));
}

int Tape::clamp_floor(int a, double floor) {
  Node n;
  n.op = Op::ClampFloor;
  n.a = a;
  n.cval = floor;
  n.val = nodes_[a].val;
  for (double& x : n.val.v) x = std::max(x, floor);
  return push(std::move(n));
}

int Tape::recip(int s) {
  if (nodes_[s].val.size() != 1) throw std::invalid_argument("recip: scalar operand required");
  Node n;
  n.op = Op::Recip;
  n.a = s;
  n.val = Tensor::scalar(1.0 / nodes_[s].val.v[0]);
  return push(std::move(n));
}

int Tape::spmv_const(const SparseMatrix* m, int x) {
  const Tensor& xv = nodes_[x].val;
  if (xv.cols != 1 || xv.rows != m->n()) throw std::invalid_argument("spmv_const: shape mismatch");
  Node n;
  n.op = Op::SpmvConst;
  n.a = x;
  n.mat = m;
  n.val = Tensor::column(spmv(*m, xv.v));
  return push(std::move(n));
}

int Tape::dense_affine(int x, int w, int b) {
  const Tensor& xv = nodes_[x].val;
  const Tensor& wv = nodes_[w].val;
  const Tensor& bv = nodes_[b].val;
  if (xv.cols != wv.rows || bv.rows != 1 || bv.cols != wv.cols)
    throw std::invalid_argument("dense_affine: shape mismatch");
  Node n;
  n.op = Op::DenseAffine;
  n.a = x;
  n.b = w;
  n.c = b;
  n.val = Tensor(xv.rows, wv.cols);
  for (int i = 0; i < xv.rows; ++i)
    for (int j = 0; j < wv.cols; ++j) {
      double acc = bv.at(0, j);
      for (int k = 0; k < xv.cols; ++k) acc += xv.at(i, k) * wv.at(k, j);
      n.val.at(i, j) = acc;
    }
  return push(std::move(n));
}

int Tape::relu(int a) {
  Node n;
  n.op = Op::Relu;
  n.a = a;
  n.val = nodes_[a].val;
  for (double& x : n.val.v) x = std::max(x, 0.0);
  return push(std::move(n));
}

int Tape::dropout(int a, double rate, Rng& rng) {
  if (rate < 0.0 || rate >= 1.0) throw std::invalid_argument("dropout: rate must be in [0,1)");
  Node n;
  n.op = Op::Dropout;
  n.a = a;
  n.val = nodes_[a].val;
  n.aux.resize(n.val.size());
  const double keep_scale = 1.0 / (1.0 - rate);
  for (std::size_t i = 0; i < n.val.size(); ++i) {
    const double m = (rate == 0.0 || rng.uniform() >= rate) ? keep_scale : 0.0;
    n.aux[i] = (rate == 0.0) ? 1.0 : m;
    n.val.v[i] *= n.aux[i];
  }
  return push(std::move(n));
}

int Tape::softmax_cross_entropy(int logits, const std::vector<int>& labels,
                                const std::vector<int>& idx) {
  const Tensor& lv = nodes_[logits].val;
  if (static_cast<int>(labels.size()) != lv.rows)
    throw std::invalid_argument("softmax_cross_entropy: label count mismatch");
  Node n;
  n.op = Op::SoftmaxCE;
  n.a = logits;
  n.iaux = idx;
  n.aux.resize(idx.size() * static_cast<std::size_t>(lv.cols));  // probabilities
  double total = 0.0;
  for (std::size_t r = 0; r < idx.size(); ++r) {
    const int i = idx[r];
    if (i < 0 || i >= lv.rows || labels[i] < 0 || labels[i] >= lv.cols)
      throw std::invalid_argument("softmax_cross_entropy: bad index or label");
    double mx = lv.at(i, 0);
    for (int j = 1; j < lv.cols; ++j) mx = std::max(mx, lv.at(i, j));
    double denom = 0.0;
    for (int j = 0; j < lv.cols; ++j) denom += std::exp(lv.at(i, j) - mx);
    for (int j = 0; j < lv.cols; ++j)
      n.aux[r * lv.cols + j] = std::exp(lv.at(i, j) - mx) / denom;
    total += mx + std::log(denom) - lv.at(i, labels[i]);
  }
  n.cval = idx.empty() ? 0.0 : 1.0 / static_cast<double>(idx.size());
  n.val = Tensor::scalar(total * n.cval);
  // stash labels of the selected rows after the probabilities
  n.iaux.reserve(idx.size() * 2);
  for (int i : idx) n.iaux.push_back(labels[i]);
  return push(std::move(n));
}

int Tape::mse(int a, int b) {
  Node n;
  n.op = Op::Mse;
  n.a = a;
  n.b = b;
  require_same_shape(nodes_[a].val, nodes_[b].val, "mse");
  double s = 0.0;
  for (std::size_t i = 0; i < nodes_[a].val.size(); ++i) {
    const double d = nodes_[a].val.v[i] - nodes_[b].val.v[i];
    s += d * d;
  }
  n.val = Tensor::scalar(0.5 * s);
  return push(std::move(n));
}

int Tape::col(int x, int l) {
  const Tensor& xv = nodes_[x].val;
  if (l < 0 || l >= xv.cols) throw std::invalid_argument("col: index out of range");
  Node n;
  n.op = Op::Col;
  n.a = x;
  n.iarg = l;
  n.val = Tensor(xv.rows, 1);
  for (int i = 0; i < xv.rows; ++i) n.val.v[i] = xv.at(i, l);
  return push(std::move(n));
}

int Tape::elem(int x, int i) {
  const Tensor& xv = nodes_[x].val;
  if (i < 0 || i >= static_cast<int>(xv.size())) throw std::invalid_argument("elem: index out of range");
  Node n;
  n.op = Op::Elem;
  n.a = x;
  n.iarg = i;
  n.val = Tensor::scalar(xv.v[i]);
  return push(std::move(n));
}

int Tape::stack_cols(const std::vector<int>& columns) {
  if (columns.empty()) throw std::invalid_argument("stack_cols: empty");
  const int rows = nodes_[columns[0]].val.rows;
  Node n;
  n.op = Op::StackCols;
  n.iaux = columns;
  n.val = Tensor(rows, static_cast<int>(columns.size()));
  for (std::size_t l = 0; l < columns.size(); ++l) {
    const Tensor& cv = nodes_[columns[l]].val;
    if (cv.rows != rows || cv.cols != 1) throw std::invalid_argument("stack_cols: shape mismatch");
    for (int i = 0; i < rows; ++i) n.val.at(i, static_cast<int>(l)) = cv.v[i];
  }
  return push(std::move(n));
}

void Tape::backward(int loss_id) {
  if (nodes_[loss_id].val.size() != 1)
    throw std::invalid_argument("backward: loss must be scalar");
  for (auto& n : nodes_) std::fill(n.grad.v.begin(), n.grad.v.end(), 0.0);
  nodes_[loss_id].grad.v[0] = 1.0;

  for (int id = loss_id; id >= 0; --id) {
    Node& n = nodes_[id];
    bool any = false;
    for (double g : n.grad.v)
      if (g != 0.0) {
        any = true;
        break;
      }
    if (!any) continue;
    switch (n.op) {
      case Op::Input:
        break;
      case Op::Add:
        for (std::size_t i = 0; i < n.grad.size(); ++i) {
          nodes_[n.a].grad.v[i] += n.grad.v[i];
          nodes_[n.b].grad.v[i] += n.grad.v[i];
        }
        break;
      case Op::Sub:
        for (std::size_t i = 0; i < n.grad.size(); ++i) {
          nodes_[n.a].grad.v[i] += n.grad.v[i];
          nodes_[n.b].grad.v[i] -= n.grad.v[i];
        }
        break;
      case Op::Hadamard:
        for (std::size_t i = 0; i < n.grad.size(); ++i) {
          nodes_[n.a].grad.v[i] += n.grad.v[i] * nodes_[n.b].val.v[i];
          nodes_[n.b].grad.v[i] += n.grad.v[i] * nodes_[n.a].val.v[i];
        }
        break;
      case Op::Scale: {
        const double sv = nodes_[n.b].val.v[0];
        double sg = 0.0;
        for (std::size_t i = 0; i < n.grad.size(); ++i) {
          nodes_[n.a].grad.v[i] += n.grad.v[i] * sv;
          sg += n.grad.v[i] * nodes_[n.a].val.v[i];
        }
        nodes_[n.b].grad.v[0] += sg;
        break;
      }
      case Op::ScaleConst:
        for (std::size_t i = 0; i < n.grad.size(); ++i) nodes_[n.a].grad.v[i] += n.grad.v[i] * n.cval;
        break;
      case Op::Dot:
        for (std::size_t i = 0; i < nodes_[n.a].val.size(); ++i) {
          nodes_[n.a].grad.v[i] += n.grad.v[0] * nodes_[n.b].val.v[i];
          nodes_[n.b].grad.v[i] += n.grad.v[0] * nodes_[n.a].val.v[i];
        }
        break;
      case Op::Norm: {
        const double nv = n.val.v[0];
        if (nv > 0.0)
          for (std::size_t i = 0; i < nodes_[n.a].val.size(); ++i)
            nodes_[n.a].grad.v[i] += n.grad.v[0] * nodes_[n.a].val.v[i] / nv;
        // subgradient 0 at the origin
        break;
      }
      case Op::ClampFloor:
        // straight-through
        for (std::size_t i = 0; i < n.grad.size(); ++i) nodes_[n.a].grad.v[i] += n.grad.v[i];
        break;
      case Op::Recip: {
        const double sv = nodes_[n.a].val.v[0];
        nodes_[n.a].grad.v[0] -= n.grad.v[0] / (sv * sv);
        break;
      }
      case Op::SpmvConst: {
        // symmetric matrix: adjoint is another product with the same matrix
        auto g = spmv(*n.mat, n.grad.v);
        for (std::size_t i = 0; i < g.size(); ++i) nodes_[n.a].grad.v[i] += g[i];
        break;
      }
      case Op::DenseAffine: {
        const Tensor& xv = nodes_[n.a].val;
        const Tensor& wv = nodes_[n.b].val;
        Tensor& xg = nodes_[n.a].grad;
        Tensor& wg = nodes_[n.b].grad;
        Tensor& bg = nodes_[n.c].grad;
        for (int i = 0; i < xv.rows; ++i)
          for (int j = 0; j < wv.cols; ++j) {
            const double g = n.grad.at(i, j);
            if (g == 0.0) continue;
            bg.at(0, j) += g;
            for (int k = 0; k < xv.cols; ++k) {
              xg.at(i, k) += g * wv.at(k, j);
              wg.at(k, j) += g * xv.at(i, k);
            }
          }
        break;
      }
      case Op::Relu:
        for (std::size_t i = 0; i < n.grad.size(); ++i)
          if (nodes_[n.a].val.v[i] > 0.0) nodes_[n.a].grad.v[i] += n.grad.v[i];
        break;
      case Op::Dropout:
        for (std::size_t i = 0; i < n.grad.size(); ++i)
          nodes_[n.a].grad.v[i] += n.grad.v[i] * n.aux[i];
        break;
      case Op::SoftmaxCE: {
        const Tensor& lv = nodes_[n.a].val;
        Tensor& lg = nodes_[n.a].grad;
        const std::size_t count = n.aux.size() / static_cast<std::size_t>(lv.cols);
        const double g = n.grad.v[0] * n.cval;
        for (std::size_t r = 0; r < count; ++r) {
          const int i = n.iaux[r];
          const int label = n.iaux[count + r];
          for (int j = 0; j < lv.cols; ++j)
            lg.at(i, j) += g * (n.aux[r * lv.cols + j] - (j == label ? 1.0 : 0.0));
        }
        break;
      }
      case Op::Mse:
        for (std::size_t i = 0; i < nodes_[n.a].val.size(); ++i) {
          const double d = nodes_[n.a].val.v[i] - nodes_[n.b].val.v[i];
          nodes_[n.a].grad.v[i] += n.grad.v[0] * d;
          nodes_[n.b].grad.v[i] -= n.grad.v[0] * d;
        }
        break;
      case Op::Col: {
        Tensor& xg = nodes_[n.a].grad;
        for (int i = 0; i < n.val.rows; ++i) xg.at(i, n.iarg) += n.grad.v[i];
        break;
      }
      case Op::Elem:
        nodes_[n.a].grad.v[n.iarg] += n.grad.v[0];
        break;
      case Op::StackCols:
        for (std::size_t l = 0; l < n.iaux.size(); ++l) {
          Tensor& cg = nodes_[n.iaux[l]].grad;
          for (int i = 0; i < n.val.rows; ++i) cg.v[i] += n.grad.at(i, static_cast<int>(l));
        }
        break;
    }
  }
}

double grad_check(const TapedLoss& f, const std::vector<std::vector<double>>& params) {
  std::vector<std::vector<double>> grads;
  const double base = f(params, &grads);
  if (!std::isfinite(base)) throw NumericalError("grad_check: non-finite loss");
  double worst = 0.0;
  auto perturbed = params;
  for (std::size_t p = 0; p < params.size(); ++p)
    for (std::size_t i = 0; i < params[p].size(); ++i) {
      const double theta = params[p][i];
      const double h = 1e-5 * std::max(1.0, std::abs(theta));
      perturbed[p][i] = theta + h;
      const double fp = f(perturbed, nullptr);
      perturbed[p][i] = theta - h;
      const double fm = f(perturbed, nullptr);
      perturbed[p][i] = theta;
      if (!std::isfinite(fp) || !std::isfinite(fm))
        throw NumericalError("grad_check: non-finite perturbed loss");
      const double fd = (fp - fm) / (2.0 * h);
      const double g = grads[p][i];
      const double rel = std::abs(g - fd) / std::max({1.0, std::abs(g), std::abs(fd)});
      worst = std::max(worst, rel);
    }
  return worst;
}

}  // namespace specfilt
