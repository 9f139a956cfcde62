#pragma once

#include <functional>
#include <memory>
#include <vector>

#include "vgd/common.hpp"

namespace vgd {

// Dense real tensor with optional participation in reverse-mode autodiff.
// A rank-k tensor [e0, ..., e_{k-1}] is stored as a row-major matrix of
// prod(e0..e_{k-2}) rows by e_{k-1} columns; all ops treat the last axis as
// columns. Values are immutable once created, except gradient accumulation
// during backward() and in-place parameter updates between training steps.
class Tensor {
 public:
  Tensor() = default;

  static Tensor zeros(const Shape& shape);
  static Tensor constant(const Shape& shape, double v);
  static Tensor scalar(double v);
  // shape defaults to {rows, cols}
  static Tensor from_matrix(Mat m);
  static Tensor from_matrix(Mat m, Shape shape);
  // rank-1 row vector
  static Tensor row(const std::vector<double>& v);
  // trainable leaf (requires_grad = true)
  static Tensor leaf(Mat m, Shape shape);
  static Tensor leaf(Mat m);

  bool defined() const { return node_ != nullptr; }
  const Shape& shape() const { return node_->shape; }
  Index rank() const { return static_cast<Index>(node_->shape.size()); }
  Index numel() const { return node_->value.size(); }
  Index rows() const { return node_->value.rows(); }
  Index cols() const { return node_->value.cols(); }

  const Mat& value() const { return node_->value; }
  // For optimizer updates between steps; never call during a taped forward.
  Mat& mutable_value() { return node_->value; }

  bool requires_grad() const { return node_->requires_grad; }
  // True when this tensor feeds gradient flow (leaf or taped intermediate).
  bool needs_grad() const { return node_->requires_grad || node_->tracked; }
  bool has_grad() const { return node_->has_grad; }
  // Accumulated gradient; zeros if this tensor never received one.
  Mat grad() const;
  void zero_grad();

  double scalar_value() const;
  // Same values, detached from gradient flow.
  Tensor detach() const;

  struct Node {
    Mat value;
    Shape shape;
    Mat grad;
    bool has_grad = false;
    bool requires_grad = false;
    bool tracked = false;
  };
  using NodePtr = std::shared_ptr<Node>;
  const NodePtr& node() const { return node_; }
  static void accumulate(const NodePtr& n, const Mat& delta);

 private:
  explicit Tensor(NodePtr n) : node_(std::move(n)) {}
  NodePtr node_;
};

// Ordered record of primitive operations. Constructing a Tape makes it the
// active tape for this thread; destruction restores the previous one.
// Replaying the record backward populates grads for every reachable leaf.
class Tape {
 public:
  Tape();
  ~Tape();
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  void record(std::function<void()> fn) { entries_.push_back(std::move(fn)); }
  std::size_t size() const { return entries_.size(); }
  void clear() { entries_.clear(); }
  void replay_backward() const;

  static Tape* active();

 private:
  std::vector<std::function<void()>> entries_;
  Tape* prev_ = nullptr;
};

// Seeds d(loss)/d(loss) = 1 and replays the active tape in reverse.
// loss must be a scalar produced on the active tape.
void backward(const Tensor& loss);

// --- primitive operations (gradient rules registered on the active tape) ---

Tensor matmul(const Tensor& a, const Tensor& b);
Tensor transpose(const Tensor& x);
Tensor reshape(const Tensor& x, Shape shape);
Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor hadamard(const Tensor& a, const Tensor& b);
Tensor scale(const Tensor& x, double c);
Tensor add_const(const Tensor& x, double c);
// y = s * x with s a scalar tensor
Tensor mul_scalar(const Tensor& x, const Tensor& s);
// broadcast a rank-1 [d] row over every row of x
Tensor add_rows(const Tensor& x, const Tensor& bias);
Tensor relu(const Tensor& x);
Tensor sigmoid(const Tensor& x);
// softmax over the last axis; optional 0/1 mask (same shape or single row),
// masked entries are exactly 0. A fully masked row is a degenerate-row error.
Tensor softmax_rows(const Tensor& x);
Tensor softmax_rows(const Tensor& x, const Tensor& mask);
// per-row normalization over the last axis (d >= 2), gamma/beta rank-1 [d]
Tensor layer_norm(const Tensor& x, const Tensor& gamma, const Tensor& beta,
                  double eps = 1e-5);
// mean over rows -> [d]
Tensor mean_rows(const Tensor& x);
Tensor sum_all(const Tensor& x);
Tensor dot(const Tensor& a, const Tensor& b);
// cos(a, b) as a scalar tensor; either input all-zero gives exactly 0
Tensor cosine_similarity(const Tensor& a, const Tensor& b);
Tensor concat_rows(const std::vector<Tensor>& xs);
Tensor concat_cols(const std::vector<Tensor>& xs);
Tensor slice_rows(const Tensor& x, Index begin, Index count);
Tensor slice_cols(const Tensor& x, Index begin, Index count);
// row gather from an embedding-style table; gradients never scatter into
// row 0 (the frozen padding row)
Tensor gather_rows(const Tensor& table, const std::vector<int>& ids);
// sum_i (logsumexp(logits_i) - logits_i[targets_i]); targets of 0 (PAD) are
// skipped
Tensor cross_entropy_with_logits(const Tensor& logits,
                                 const std::vector<int>& targets);

}  // namespace vgd
