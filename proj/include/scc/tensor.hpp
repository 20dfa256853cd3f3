#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <vector>

namespace scc {

using Shape = std::vector<int>;

int64_t shape_numel(const Shape& shape);
std::string shape_str(const Shape& shape);

namespace detail {
struct TensorNode {
    Shape shape;
    std::vector<double> data;
    std::vector<double> grad;  // empty until backward touches it
    bool requires_grad = false;
};
}  // namespace detail

// Shared handle to a dense float64 buffer. Feature maps use the (N, C, H, W)
// convention; copies of a Tensor alias the same storage.
class Tensor {
public:
    Tensor() = default;
    explicit Tensor(Shape shape, double fill = 0.0, bool requires_grad = false);
    static Tensor from_data(Shape shape, std::vector<double> data, bool requires_grad = false);
    static Tensor scalar(double value, bool requires_grad = false);

    bool defined() const { return node_ != nullptr; }
    const Shape& shape() const { return node_->shape; }
    int dim(int i) const { return node_->shape[static_cast<size_t>(i)]; }
    int rank() const { return static_cast<int>(node_->shape.size()); }
    int64_t numel() const { return static_cast<int64_t>(node_->data.size()); }

    std::vector<double>& data() { return node_->data; }
    const std::vector<double>& data() const { return node_->data; }
    double value() const;  // scalar accessor

    bool requires_grad() const { return node_->requires_grad; }
    void set_requires_grad(bool v) { node_->requires_grad = v; }

    bool has_grad() const { return !node_->grad.empty(); }
    std::vector<double>& grad();  // allocates zeros on first use
    const std::vector<double>& grad_view() const { return node_->grad; }
    void zero_grad();

    bool same_storage(const Tensor& other) const { return node_ == other.node_; }

private:
    std::shared_ptr<detail::TensorNode> node_;
};

bool all_finite(const Tensor& t);

// Ordered record of executed operations. Ops append their backward rule during
// the forward pass (inputs always precede the op), so one reverse sweep visits
// every operation exactly once. A tape and its tensors stay on one thread.
class Tape {
public:
    void record(std::function<void()> backward_fn) { entries_.push_back(std::move(backward_fn)); }
    size_t size() const { return entries_.size(); }
    void clear() { entries_.clear(); }

    // Seeds d(loss)/d(loss) = 1 and replays the tape in reverse, accumulating
    // (+=) into the grad slot of every tensor that requires grad.
    void backward(const Tensor& loss);

private:
    std::vector<std::function<void()>> entries_;
};

enum class Activation { Sigmoid, Relu, Silu };

// Grouped 2D cross-correlation. weight is (Cout, Cin/groups, k, k); bias may
// be null. Output spatial size is (H + 2*pad - k) / stride + 1.
Tensor conv2d(Tape& tape, const Tensor& input, const Tensor& weight, const Tensor* bias,
              int stride, int padding, int groups);

Tensor group_norm(Tape& tape, const Tensor& input, int groups, const Tensor& gamma,
                  const Tensor& beta, double eps = 1e-5);

Tensor global_avg_pool(Tape& tape, const Tensor& input);

Tensor activation(Tape& tape, const Tensor& input, Activation kind);

Tensor softmax(Tape& tape, const Tensor& input, int axis);

// Splits along the channel axis (axis 1) into contiguous slabs.
std::vector<Tensor> channel_split(Tape& tape, const Tensor& input, const std::vector<int>& sizes);

Tensor channel_concat(Tape& tape, const std::vector<Tensor>& parts);

Tensor add(Tape& tape, const Tensor& a, const Tensor& b);
Tensor sub(Tape& tape, const Tensor& a, const Tensor& b);
Tensor mul(Tape& tape, const Tensor& a, const Tensor& b);
Tensor scalar_mul(Tape& tape, const Tensor& a, double c);

// y[n,c,h,w] = x[n,c,h,w] * s[n,c,0,0]
Tensor scale_channels(Tape& tape, const Tensor& x, const Tensor& s);

Tensor reshape(Tape& tape, const Tensor& x, Shape new_shape);

Tensor sum(Tape& tape, const Tensor& x);
Tensor mean(Tape& tape, const Tensor& x);

// Elementwise binary cross-entropy from logits: softplus(z) - z*t. The target
// is a constant; the gradient to z is sigmoid(z) - t.
Tensor bce_with_logits(Tape& tape, const Tensor& logits, const Tensor& targets);

struct GradCheckResult {
    double max_rel_error = 0.0;
    int64_t coords_checked = 0;
    int64_t coords_failed = 0;
    int64_t worst_index = -1;
    double worst_analytic = 0.0;
    double worst_numeric = 0.0;
    double tolerance = 0.0;
    bool passed = false;
    std::string describe() const;
};

// Central-difference check of d(fn)/d(input) against the tape gradient.
// fn must be pure and scalar-valued; h in (0, 1e-2]. Relative error per
// coordinate is |a-f| / max(|a|,|f|), with exact agreement on zero allowed.
GradCheckResult grad_check(const std::function<Tensor(Tape&, const Tensor&)>& fn,
                           const Tensor& input, double h, double tol);

}  // namespace scc
