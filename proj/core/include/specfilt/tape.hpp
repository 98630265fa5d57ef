#pragma once

#include <functional>
#include <span>
#include <vector>

#include "specfilt/graph.hpp"
#include "specfilt/rng.hpp"

namespace specfilt {

/// Dense row-major tensor; scalars are 1x1, vectors n x 1.
struct Tensor {
  int rows = 0;
  int cols = 1;
  std::vector<double> v;

  Tensor() = default;
  Tensor(int r, int c, double fill = 0.0) : rows(r), cols(c), v(static_cast<std::size_t>(r) * c, fill) {}
  static Tensor scalar(double x) {
    Tensor t(1, 1);
    t.v[0] = x;
    return t;
  }
  static Tensor column(std::span<const double> x) {
    Tensor t(static_cast<int>(x.size()), 1);
    std::copy(x.begin(), x.end(), t.v.begin());
    return t;
  }
  std::size_t size() const { return v.size(); }
  double& at(int i, int j) { return v[static_cast<std::size_t>(i) * cols + j]; }
  double at(int i, int j) const { return v[static_cast<std::size_t>(i) * cols + j]; }
};

/// Append-only reverse-mode tape over the fixed op set the models need.
/// Insertion order is topological order; backward() walks it once in reverse,
/// accumulating adjoints additively.
class Tape {
 public:
  int input(Tensor t);  // leaf: parameter or constant

  int add(int a, int b);
  int sub(int a, int b);
  int hadamard(int a, int b);
  /// tensor * scalar-node
  int scale(int t, int s);
  int scale_const(int t, double c);
  int dot(int a, int b);
  int norm(int a);
  /// elementwise max(x, floor); straight-through gradient on the clamped branch
  int clamp_floor(int a, double floor);
  /// scalar reciprocal
  int recip(int s);
  /// y = M x with a constant symmetric sparse matrix (outlives the tape)
  int spmv_const(const SparseMatrix* m, int x);
  /// X (N x F) * W (F x H) + row-broadcast b (1 x H)
  int dense_affine(int x, int w, int b);
  int relu(int a);
  /// inverted dropout; mask drawn from the stream at record time
  int dropout(int a, double rate, Rng& rng);
  /// mean cross entropy of softmax(logits) rows listed in idx
  int softmax_cross_entropy(int logits, const std::vector<int>& labels, const std::vector<int>& idx);
  /// 0.5 * || a - b ||^2
  int mse(int a, int b);
  /// column l of an N x d tensor as N x 1
  int col(int x, int l);
  /// flat element i as a scalar
  int elem(int x, int i);
  /// N x d tensor from d column nodes
  int stack_cols(const std::vector<int>& columns);

  const Tensor& value(int id) const { return nodes_[id].val; }
  const Tensor& gradient(int id) const { return nodes_[id].grad; }

  /// Seeds d(loss)=1 and accumulates adjoints; loss must be scalar.
  void backward(int loss_id);

 private:
  enum class Op {
    Input, Add, Sub, Hadamard, Scale, ScaleConst, Dot, Norm, ClampFloor, Recip,
    SpmvConst, DenseAffine, Relu, Dropout, SoftmaxCE, Mse, Col, Elem, StackCols
  };
  struct Node {
    Op op;
    int a = -1, b = -1, c = -1;
    double cval = 0.0;
    int iarg = 0;
    const SparseMatrix* mat = nullptr;
    std::vector<double> aux;
    std::vector<int> iaux;
    Tensor val;
    Tensor grad;
  };

  int push(Node n);
  std::vector<Node> nodes_;
};

/// A scalar function rebuilt from parameter values; fills per-parameter
/// gradients when `grads` is non-null. Used by grad_check and the trainers.
using TapedLoss = std::function<double(const std::vector<std::vector<double>>& params,
                                       std::vector<std::vector<double>>* grads)>;

/// Central finite differences (h = 1e-5 * max(1, |theta|)) against the tape
/// gradient; returns the worst relative error over all coordinates.
double grad_check(const TapedLoss& f, const std::vector<std::vector<double>>& params);

}  // namespace specfilt
