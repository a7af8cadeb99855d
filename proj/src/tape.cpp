#include "aepn/tape.hpp"

#include <algorithm>
#include <cmath>

namespace aepn::nn {

int Tape::push(Node n) {
  nodes_.push_back(std::move(n));
  return static_cast<int>(nodes_.size() - 1);
}

int Tape::input(Mat v) {
  Node n;
  n.op = Op::Input;
  n.val = std::move(v);
  return push(std::move(n));
}

int Tape::matmul(int a, int b) {
  const Mat& A = value(a);
  const Mat& B = value(b);
  Node n;
  n.op = Op::MatMul;
  n.a = a;
  n.b = b;
  n.val = Mat(A.rows, B.cols);
  for (int i = 0; i < A.rows; ++i)
    for (int k = 0; k < A.cols; ++k) {
      const double x = A.at(i, k);
      if (x == 0.0) continue;
      for (int j = 0; j < B.cols; ++j) n.val.at(i, j) += x * B.at(k, j);
    }
  return push(std::move(n));
}

int Tape::add(int a, int b) {
  const Mat& A = value(a);
  const Mat& B = value(b);
  Node n;
  n.op = Op::Add;
  n.a = a;
  n.b = b;
  n.val = A;
  for (std::size_t i = 0; i < n.val.size(); ++i) n.val.d[i] += B.d[i];
  return push(std::move(n));
}

int Tape::sub(int a, int b) { return add(a, scale(b, -1.0)); }

int Tape::add_rowvec(int a, int b) {
  const Mat& A = value(a);
  const Mat& B = value(b);
  Node n;
  n.op = Op::AddRowVec;
  n.a = a;
  n.b = b;
  n.val = A;
  for (int i = 0; i < A.rows; ++i)
    for (int j = 0; j < A.cols; ++j) n.val.at(i, j) += B.at(0, j);
  return push(std::move(n));
}

int Tape::relu(int a) {
  Node n;
  n.op = Op::Relu;
  n.a = a;
  n.val = value(a);
  for (auto& x : n.val.d) x = std::max(0.0, x);
  return push(std::move(n));
}

int Tape::gather_rows(int a, std::vector<int> rows) {
  const Mat& A = value(a);
  Node n;
  n.op = Op::GatherRows;
  n.a = a;
  n.val = Mat(static_cast<int>(rows.size()), A.cols);
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (int j = 0; j < A.cols; ++j) n.val.at(static_cast<int>(i), j) = A.at(rows[i], j);
  n.idx = std::move(rows);
  return push(std::move(n));
}

int Tape::scatter_rows(int a, std::vector<int> rows, int n_rows) {
  const Mat& A = value(a);
  Node n;
  n.op = Op::ScatterRows;
  n.a = a;
  n.val = Mat(n_rows, A.cols);
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (int j = 0; j < A.cols; ++j) n.val.at(rows[i], j) = A.at(static_cast<int>(i), j);
  n.idx = std::move(rows);
  return push(std::move(n));
}

int Tape::edge_mean(int x, std::vector<int> src, std::vector<int> dst, int n_out) {
  const Mat& X = value(x);
  Node n;
  n.op = Op::EdgeMean;
  n.a = x;
  n.val = Mat(n_out, X.cols);
  std::vector<double> deg(static_cast<std::size_t>(n_out), 0.0);
  for (const int d : dst) deg[static_cast<std::size_t>(d)] += 1.0;
  for (std::size_t e = 0; e < src.size(); ++e) {
    const double w = 1.0 / deg[static_cast<std::size_t>(dst[e])];
    for (int j = 0; j < X.cols; ++j) n.val.at(dst[e], j) += w * X.at(src[e], j);
  }
  n.idx = std::move(src);
  n.idx2 = std::move(dst);
  return push(std::move(n));
}

int Tape::mean_rows(int a) {
  const Mat& A = value(a);
  Node n;
  n.op = Op::MeanRows;
  n.a = a;
  n.val = Mat(1, A.cols);
  for (int i = 0; i < A.rows; ++i)
    for (int j = 0; j < A.cols; ++j) n.val.at(0, j) += A.at(i, j) / A.rows;
  return push(std::move(n));
}

int Tape::log_softmax_col(int a) {
  const Mat& A = value(a);
  Node n;
  n.op = Op::LogSoftmaxCol;
  n.a = a;
  n.val = A;
  double mx = A.d[0];
  for (const double v : A.d) mx = std::max(mx, v);
  double z = 0.0;
  for (const double v : A.d) z += std::exp(v - mx);
  const double lse = mx + std::log(z);
  for (auto& v : n.val.d) v -= lse;
  return push(std::move(n));
}

int Tape::mul(int a, int b) {
  const Mat& A = value(a);
  const Mat& B = value(b);
  Node n;
  n.op = Op::Mul;
  n.a = a;
  n.b = b;
  n.val = A;
  for (std::size_t i = 0; i < n.val.size(); ++i) n.val.d[i] *= B.d[i];
  return push(std::move(n));
}

int Tape::scale(int a, double s) {
  Node n;
  n.op = Op::Scale;
  n.a = a;
  n.s0 = s;
  n.val = value(a);
  for (auto& x : n.val.d) x *= s;
  return push(std::move(n));
}

int Tape::add_const(int a, double c) {
  Node n;
  n.op = Op::AddConst;
  n.a = a;
  n.s0 = c;
  n.val = value(a);
  for (auto& x : n.val.d) x += c;
  return push(std::move(n));
}

int Tape::exp_(int a) {
  Node n;
  n.op = Op::Exp;
  n.a = a;
  n.val = value(a);
  for (auto& x : n.val.d) x = std::exp(x);
  return push(std::move(n));
}

int Tape::clamp(int a, double lo, double hi) {
  Node n;
  n.op = Op::Clamp;
  n.a = a;
  n.s0 = lo;
  n.s1 = hi;
  n.val = value(a);
  for (auto& x : n.val.d) x = std::clamp(x, lo, hi);
  return push(std::move(n));
}

int Tape::min_(int a, int b) {
  const Mat& A = value(a);
  const Mat& B = value(b);
  Node n;
  n.op = Op::Min;
  n.a = a;
  n.b = b;
  n.val = A;
  for (std::size_t i = 0; i < n.val.size(); ++i) n.val.d[i] = std::min(A.d[i], B.d[i]);
  return push(std::move(n));
}

int Tape::sum(int a) {
  const Mat& A = value(a);
  Node n;
  n.op = Op::Sum;
  n.a = a;
  n.val = Mat(1, 1);
  for (const double v : A.d) n.val.d[0] += v;
  return push(std::move(n));
}

void Tape::backward(int seed) {
  for (auto& n : nodes_) n.grad = Mat();
  auto ensure = [&](int i) {
    Node& n = nodes_[static_cast<std::size_t>(i)];
    if (n.grad.size() == 0) n.grad = Mat(n.val.rows, n.val.cols);
    return &n;
  };
  ensure(seed)->grad.d[0] = 1.0;
  for (int i = static_cast<int>(nodes_.size()) - 1; i >= 0; --i) {
    Node& n = nodes_[static_cast<std::size_t>(i)];
    if (n.grad.size() == 0) continue;  // not reachable from the seed
    const Mat& g = n.grad;
    switch (n.op) {
      case Op::Input:
        break;
      case Op::MatMul: {
        Node* pa = ensure(n.a);
        Node* pb = ensure(n.b);
        const Mat& A = pa->val;
        const Mat& B = pb->val;
        for (int r = 0; r < A.rows; ++r)
          for (int k = 0; k < A.cols; ++k) {
            double acc = 0.0;
            for (int j = 0; j < B.cols; ++j) acc += g.at(r, j) * B.at(k, j);
            pa->grad.at(r, k) += acc;
          }
        for (int k = 0; k < A.cols; ++k)
          for (int j = 0; j < B.cols; ++j) {
            double acc = 0.0;
            for (int r = 0; r < A.rows; ++r) acc += A.at(r, k) * g.at(r, j);
            pb->grad.at(k, j) += acc;
          }
        break;
      }
      case Op::Add: {
        Node* pa = ensure(n.a);
        Node* pb = ensure(n.b);
        for (std::size_t k = 0; k < g.size(); ++k) {
          pa->grad.d[k] += g.d[k];
          pb->grad.d[k] += g.d[k];
        }
        break;
      }
      case Op::AddRowVec: {
        Node* pa = ensure(n.a);
        Node* pb = ensure(n.b);
        for (std::size_t k = 0; k < g.size(); ++k) pa->grad.d[k] += g.d[k];
        for (int r = 0; r < g.rows; ++r)
          for (int c = 0; c < g.cols; ++c) pb->grad.at(0, c) += g.at(r, c);
        break;
      }
      case Op::Relu: {
        Node* pa = ensure(n.a);
        for (std::size_t k = 0; k < g.size(); ++k)
          if (pa->val.d[k] > 0.0) pa->grad.d[k] += g.d[k];
        break;
      }
      case Op::GatherRows: {
        Node* pa = ensure(n.a);
        for (std::size_t r = 0; r < n.idx.size(); ++r)
          for (int c = 0; c < g.cols; ++c)
            pa->grad.at(n.idx[r], c) += g.at(static_cast<int>(r), c);
        break;
      }
      case Op::ScatterRows: {
        Node* pa = ensure(n.a);
        for (std::size_t r = 0; r < n.idx.size(); ++r)
          for (int c = 0; c < g.cols; ++c)
            pa->grad.at(static_cast<int>(r), c) += g.at(n.idx[r], c);
        break;
      }
      case Op::EdgeMean: {
        Node* pa = ensure(n.a);
        std::vector<double> deg(static_cast<std::size_t>(n.val.rows), 0.0);
        for (const int d : n.idx2) deg[static_cast<std::size_t>(d)] += 1.0;
        for (std::size_t e = 0; e < n.idx.size(); ++e) {
          const double w = 1.0 / deg[static_cast<std::size_t>(n.idx2[e])];
          for (int c = 0; c < g.cols; ++c) pa->grad.at(n.idx[e], c) += w * g.at(n.idx2[e], c);
        }
        break;
      }
      case Op::MeanRows: {
        Node* pa = ensure(n.a);
        const int rows = pa->val.rows;
        for (int r = 0; r < rows; ++r)
          for (int c = 0; c < g.cols; ++c) pa->grad.at(r, c) += g.at(0, c) / rows;
        break;
      }
      case Op::LogSoftmaxCol: {
        Node* pa = ensure(n.a);
        double gsum = 0.0;
        for (const double v : g.d) gsum += v;
        for (std::size_t k = 0; k < g.size(); ++k)
          pa->grad.d[k] += g.d[k] - std::exp(n.val.d[k]) * gsum;
        break;
      }
      case Op::Mul: {
        Node* pa = ensure(n.a);
        Node* pb = ensure(n.b);
        for (std::size_t k = 0; k < g.size(); ++k) {
          pa->grad.d[k] += g.d[k] * pb->val.d[k];
          pb->grad.d[k] += g.d[k] * pa->val.d[k];
        }
        break;
      }
      case Op::Scale: {
        Node* pa = ensure(n.a);
        for (std::size_t k = 0; k < g.size(); ++k) pa->grad.d[k] += g.d[k] * n.s0;
        break;
      }
      case Op::AddConst: {
        Node* pa = ensure(n.a);
        for (std::size_t k = 0; k < g.size(); ++k) pa->grad.d[k] += g.d[k];
        break;
      }
      case Op::Exp: {
        Node* pa = ensure(n.a);
        for (std::size_t k = 0; k < g.size(); ++k) pa->grad.d[k] += g.d[k] * n.val.d[k];
        break;
      }
      case Op::Clamp: {
        Node* pa = ensure(n.a);
        for (std::size_t k = 0; k < g.size(); ++k)
          if (pa->val.d[k] >= n.s0 && pa->val.d[k] <= n.s1) pa->grad.d[k] += g.d[k];
        break;
      }
      case Op::Min: {
        Node* pa = ensure(n.a);
        Node* pb = ensure(n.b);
        for (std::size_t k = 0; k < g.size(); ++k) {
          if (pa->val.d[k] <= pb->val.d[k])
            pa->grad.d[k] += g.d[k];
          else
            pb->grad.d[k] += g.d[k];
        }
        break;
      }
      case Op::Sum: {
        Node* pa = ensure(n.a);
        for (auto& x : pa->grad.d) x += g.d[0];
        break;
      }
    }
  }
}

}  // namespace aepn::nn
