#pragma once

#include <vector>

#include "aepn/error.hpp"

namespace aepn::nn {

// Dense row-major matrix.
struct Mat {
  int rows = 0, cols = 0;
  std::vector<double> d;

  Mat() = default;
  Mat(int r, int c) : rows(r), cols(c), d(static_cast<std::size_t>(r) * static_cast<std::size_t>(c), 0.0) {}

  double& at(int r, int c) { return d[static_cast<std::size_t>(r) * static_cast<std::size_t>(cols) + static_cast<std::size_t>(c)]; }
  double at(int r, int c) const { return d[static_cast<std::size_t>(r) * static_cast<std::size_t>(cols) + static_cast<std::size_t>(c)]; }
  std::size_t size() const { return d.size(); }
};

// Reverse-mode accumulation over a per-use computation tape. Nodes hold
// matrix values; backward() fills gradients for every node reachable from
// the seed, in particular the leaves created with input().
class Tape {
 public:
  int input(Mat v);

  int matmul(int a, int b);
  int add(int a, int b);
  int sub(int a, int b);
  int add_rowvec(int a, int b);  // b is 1xC, broadcast over rows of a
  int relu(int a);
  int gather_rows(int a, std::vector<int> rows);
  int scatter_rows(int a, std::vector<int> rows, int n_rows);  // out[rows[i], :] = a[i, :]
  // out[i, :] = mean of x[src[e], :] over edges e with dst[e] == i (zero if none)
  int edge_mean(int x, std::vector<int> src, std::vector<int> dst, int n_out);
  int mean_rows(int a);         // 1xC
  int log_softmax_col(int a);   // a is Nx1
  int mul(int a, int b);        // elementwise
  int scale(int a, double s);
  int add_const(int a, double c);
  int exp_(int a);
  int clamp(int a, double lo, double hi);
  int min_(int a, int b);
  int sum(int a);  // 1x1

  const Mat& value(int i) const { return nodes_[static_cast<std::size_t>(i)].val; }
  const Mat& grad(int i) const { return nodes_[static_cast<std::size_t>(i)].grad; }

  // Seeds the (1x1) node with gradient 1 and propagates backward.
  void backward(int seed);

  std::size_t num_nodes() const { return nodes_.size(); }

 private:
  enum class Op {
    Input, MatMul, Add, AddRowVec, Relu, GatherRows, ScatterRows, EdgeMean,
    MeanRows, LogSoftmaxCol, Mul, Scale, AddConst, Exp, Clamp, Min, Sum,
  };

  struct Node {
    Op op = Op::Input;
    int a = -1, b = -1;
    double s0 = 0.0, s1 = 0.0;
    std::vector<int> idx, idx2;
    Mat val, grad;
  };

  int push(Node n);
  std::vector<Node> nodes_;
};

}  // namespace aepn::nn
