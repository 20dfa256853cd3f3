#include "scc/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "scc/kernels.hpp"
#include "scc/utils.hpp"

namespace scc {

int64_t shape_numel(const Shape& shape) {
    int64_t n = 1;
    for (int d : shape) n *= d;
    return n;
}

std::string shape_str(const Shape& shape) {
    std::string s = "(";
    for (size_t i = 0; i < shape.size(); ++i) {
        if (i) s += ",";
        s += std::to_string(shape[i]);
    }
    return s + ")";
}

Tensor::Tensor(Shape shape, double fill, bool requires_grad) {
    for (int d : shape) {
        if (d <= 0)
            throw std::invalid_argument(cat("tensor dimension must be positive, got shape ",
                                            shape_str(shape)));
    }
    node_ = std::make_shared<detail::TensorNode>();
    node_->shape = std::move(shape);
    node_->data.assign(static_cast<size_t>(shape_numel(node_->shape)), fill);
    node_->requires_grad = requires_grad;
}

Tensor Tensor::from_data(Shape shape, std::vector<double> data, bool requires_grad) {
    if (shape_numel(shape) != static_cast<int64_t>(data.size()))
        throw std::invalid_argument(cat("data length ", data.size(), " does not match shape ",
                                        shape_str(shape)));
    Tensor t(shape, 0.0, requires_grad);
    t.node_->data = std::move(data);
    return t;
}

Tensor Tensor::scalar(double value, bool requires_grad) {
    return from_data({1}, {value}, requires_grad);
}

double Tensor::value() const {
    if (numel() != 1)
        throw std::invalid_argument(cat("value() requires a scalar tensor, shape is ",
                                        shape_str(shape())));
    return node_->data[0];
}

std::vector<double>& Tensor::grad() {
    if (node_->grad.empty()) node_->grad.assign(node_->data.size(), 0.0);
    return node_->grad;
}

void Tensor::zero_grad() { node_->grad.clear(); }

bool all_finite(const Tensor& t) {
    for (double v : t.data())
        if (!std::isfinite(v)) return false;
    return true;
}

void Tape::backward(const Tensor& loss) {
    if (loss.numel() != 1)
        throw std::invalid_argument(cat("backward requires a scalar loss, shape is ",
                                        shape_str(loss.shape())));
    Tensor seed = loss;
    seed.grad()[0] += 1.0;
    for (auto it = entries_.rbegin(); it != entries_.rend(); ++it) (*it)();
}

namespace {

bool same_shape(const Tensor& a, const Tensor& b) { return a.shape() == b.shape(); }

void require_rank4(const Tensor& t, const char* op) {
    if (t.rank() != 4)
        throw std::invalid_argument(cat(op, ": expected a rank-4 (N,C,H,W) tensor, got ",
                                        shape_str(t.shape())));
}

double sigmoid_scalar(double x) {
    if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
    const double e = std::exp(x);
    return e / (1.0 + e);
}

}  // namespace

Tensor conv2d(Tape& tape, const Tensor& input, const Tensor& weight, const Tensor* bias,
              int stride, int padding, int groups) {
    require_rank4(input, "conv2d");
    if (weight.rank() != 4)
        throw std::invalid_argument(cat("conv2d: weight must be rank-4 (Cout,Cin/g,k,k), got ",
                                        shape_str(weight.shape())));
    const int n = input.dim(0), cin = input.dim(1), h = input.dim(2), w = input.dim(3);
    const int cout = weight.dim(0), k = weight.dim(2);
    if (weight.dim(2) != weight.dim(3))
        throw std::invalid_argument(cat("conv2d: kernel must be square, got ",
                                        weight.dim(2), "x", weight.dim(3)));
    if (stride <= 0) throw std::invalid_argument("conv2d: stride must be positive");
    if (padding < 0) throw std::invalid_argument("conv2d: padding must be non-negative");
    if (groups <= 0) throw std::invalid_argument("conv2d: groups must be positive");
    if (cin % groups != 0)
        throw std::invalid_argument(cat("conv2d: input channels ", cin,
                                        " not divisible by groups ", groups));
    if (cout % groups != 0)
        throw std::invalid_argument(cat("conv2d: output channels ", cout,
                                        " not divisible by groups ", groups));
    if (weight.dim(1) != cin / groups)
        throw std::invalid_argument(cat("conv2d: weight expects ", weight.dim(1),
                                        " input channels per group, input provides ",
                                        cin / groups));
    if (bias && (bias->rank() != 1 || bias->dim(0) != cout))
        throw std::invalid_argument(cat("conv2d: bias must have shape (", cout, "), got ",
                                        shape_str(bias->shape())));
    const int hout_num = h + 2 * padding - k;
    const int wout_num = w + 2 * padding - k;
    if (hout_num < 0 || wout_num < 0 || hout_num % stride != 0 || wout_num % stride != 0)
        throw std::invalid_argument(cat("conv2d: input ", h, "x", w, " with kernel ", k,
                                        ", stride ", stride, ", padding ", padding,
                                        " has no integral output size"));
    const int hout = hout_num / stride + 1;
    const int wout = wout_num / stride + 1;

    kernels::Conv2dGeom geom{n, cin, h, w, cout, k, stride, padding, groups, hout, wout};
    Tensor out({n, cout, hout, wout});
    kernels::conv2d_forward(input.data().data(), weight.data().data(),
                            bias ? bias->data().data() : nullptr, out.data().data(), geom);

    const bool needs = input.requires_grad() || weight.requires_grad() ||
                       (bias && bias->requires_grad());
    out.set_requires_grad(needs);
    if (needs) {
        Tensor x = input, wt = weight, y = out;
        Tensor b = bias ? *bias : Tensor();
        tape.record([x, wt, b, y, geom]() mutable {
            if (!y.has_grad()) return;
            const double* dy = y.grad_view().data();
            if (x.requires_grad())
                kernels::conv2d_backward_input(wt.data().data(), dy, x.grad().data(), geom);
            if (wt.requires_grad())
                kernels::conv2d_backward_weight(x.data().data(), dy, wt.grad().data(), geom);
            if (b.defined() && b.requires_grad())
                kernels::conv2d_backward_bias(dy, b.grad().data(), geom);
        });
    }
    return out;
}

Tensor group_norm(Tape& tape, const Tensor& input, int groups, const Tensor& gamma,
                  const Tensor& beta, double eps) {
    require_rank4(input, "group_norm");
    const int n = input.dim(0), c = input.dim(1), h = input.dim(2), w = input.dim(3);
    if (groups <= 0 || c % groups != 0)
        throw std::invalid_argument(cat("group_norm: channels ", c, " not divisible by groups ",
                                        groups));
    if (eps <= 0) throw std::invalid_argument("group_norm: eps must be positive");
    if (gamma.rank() != 1 || gamma.dim(0) != c || beta.rank() != 1 || beta.dim(0) != c)
        throw std::invalid_argument(cat("group_norm: gamma/beta must have shape (", c, ")"));

    kernels::GroupNormGeom geom{n, c, h, w, groups, eps};
    Tensor out(input.shape());
    auto mean = std::make_shared<std::vector<double>>(static_cast<size_t>(n) * groups);
    auto invstd = std::make_shared<std::vector<double>>(static_cast<size_t>(n) * groups);
    kernels::group_norm_forward(input.data().data(), gamma.data().data(), beta.data().data(),
                                out.data().data(), mean->data(), invstd->data(), geom);

    const bool needs = input.requires_grad() || gamma.requires_grad() || beta.requires_grad();
    out.set_requires_grad(needs);
    if (needs) {
        Tensor x = input, ga = gamma, be = beta, y = out;
        tape.record([x, ga, be, y, geom, mean, invstd]() mutable {
            if (!y.has_grad()) return;
            const double* dy = y.grad_view().data();
            if (ga.requires_grad() || be.requires_grad())
                kernels::group_norm_backward_param(x.data().data(), dy, mean->data(),
                                                   invstd->data(), ga.grad().data(),
                                                   be.grad().data(), geom);
            if (x.requires_grad())
                kernels::group_norm_backward_input(x.data().data(), ga.data().data(), dy,
                                                   mean->data(), invstd->data(), x.grad().data(),
                                                   geom);
        });
    }
    return out;
}

Tensor global_avg_pool(Tape& tape, const Tensor& input) {
    require_rank4(input, "global_avg_pool");
    const int n = input.dim(0), c = input.dim(1), h = input.dim(2), w = input.dim(3);
    Tensor out({n, c, 1, 1});
    kernels::global_avg_pool_forward(input.data().data(), out.data().data(), n, c, h, w);
    out.set_requires_grad(input.requires_grad());
    if (input.requires_grad()) {
        Tensor x = input, y = out;
        tape.record([x, y, n, c, h, w]() mutable {
            if (!y.has_grad()) return;
            kernels::global_avg_pool_backward(y.grad_view().data(), x.grad().data(), n, c, h, w);
        });
    }
    return out;
}

Tensor activation(Tape& tape, const Tensor& input, Activation kind) {
    Tensor out(input.shape());
    const auto& x = input.data();
    auto& y = out.data();
    switch (kind) {
        case Activation::Sigmoid:
            for (size_t i = 0; i < x.size(); ++i) y[i] = sigmoid_scalar(x[i]);
            break;
        case Activation::Relu:
            for (size_t i = 0; i < x.size(); ++i) y[i] = x[i] > 0 ? x[i] : 0.0;
            break;
        case Activation::Silu:
            for (size_t i = 0; i < x.size(); ++i) y[i] = x[i] * sigmoid_scalar(x[i]);
            break;
    }
    out.set_requires_grad(input.requires_grad());
    if (input.requires_grad()) {
        Tensor xin = input, yout = out;
        tape.record([xin, yout, kind]() mutable {
            if (!yout.has_grad()) return;
            const auto& xd = xin.data();
            const auto& yd = yout.data();
            const auto& dy = yout.grad_view();
            auto& dx = xin.grad();
            switch (kind) {
                case Activation::Sigmoid:
                    for (size_t i = 0; i < xd.size(); ++i) dx[i] += dy[i] * yd[i] * (1.0 - yd[i]);
                    break;
                case Activation::Relu:
                    for (size_t i = 0; i < xd.size(); ++i) dx[i] += xd[i] > 0 ? dy[i] : 0.0;
                    break;
                case Activation::Silu:
                    for (size_t i = 0; i < xd.size(); ++i) {
                        const double s = sigmoid_scalar(xd[i]);
                        dx[i] += dy[i] * s * (1.0 + xd[i] * (1.0 - s));
                    }
                    break;
            }
        });
    }
    return out;
}

Tensor softmax(Tape& tape, const Tensor& input, int axis) {
    if (axis < 0 || axis >= input.rank())
        throw std::invalid_argument(cat("softmax: axis ", axis, " invalid for shape ",
                                        shape_str(input.shape())));
    kernels::SoftmaxGeom geom{1, static_cast<size_t>(input.dim(axis)), 1};
    for (int i = 0; i < axis; ++i) geom.outer *= static_cast<size_t>(input.dim(i));
    for (int i = axis + 1; i < input.rank(); ++i) geom.inner *= static_cast<size_t>(input.dim(i));

    Tensor out(input.shape());
    kernels::softmax_forward(input.data().data(), out.data().data(), geom);
    out.set_requires_grad(input.requires_grad());
    if (input.requires_grad()) {
        Tensor x = input, y = out;
        tape.record([x, y, geom]() mutable {
            if (!y.has_grad()) return;
            kernels::softmax_backward(y.data().data(), y.grad_view().data(), x.grad().data(),
                                      geom);
        });
    }
    return out;
}

std::vector<Tensor> channel_split(Tape& tape, const Tensor& input,
                                  const std::vector<int>& sizes) {
    require_rank4(input, "channel_split");
    const int n = input.dim(0), c = input.dim(1), h = input.dim(2), w = input.dim(3);
    int total = 0;
    for (int s : sizes) {
        if (s <= 0) throw std::invalid_argument("channel_split: sizes must be positive");
        total += s;
    }
    if (total != c)
        throw std::invalid_argument(cat("channel_split: sizes sum to ", total,
                                        " but input has ", c, " channels"));
    const size_t plane = static_cast<size_t>(h) * w;
    std::vector<Tensor> parts;
    parts.reserve(sizes.size());
    int offset = 0;
    for (int s : sizes) {
        Tensor part({n, s, h, w});
        for (int ni = 0; ni < n; ++ni) {
            const double* src = input.data().data() + (static_cast<size_t>(ni) * c + offset) * plane;
            double* dst = part.data().data() + static_cast<size_t>(ni) * s * plane;
            std::copy(src, src + static_cast<size_t>(s) * plane, dst);
        }
        part.set_requires_grad(input.requires_grad());
        parts.push_back(part);
        offset += s;
    }
    if (input.requires_grad()) {
        Tensor x = input;
        std::vector<Tensor> outs = parts;
        std::vector<int> sz = sizes;
        tape.record([x, outs, sz, n, c, plane]() mutable {
            auto& dx = x.grad();
            int off = 0;
            for (size_t p = 0; p < outs.size(); ++p) {
                if (outs[p].has_grad()) {
                    const auto& dpart = outs[p].grad_view();
                    for (int ni = 0; ni < n; ++ni) {
                        double* dst = dx.data() + (static_cast<size_t>(ni) * c + off) * plane;
                        const double* src = dpart.data() + static_cast<size_t>(ni) * sz[p] * plane;
                        for (size_t i = 0; i < static_cast<size_t>(sz[p]) * plane; ++i)
                            dst[i] += src[i];
                    }
                }
                off += sz[p];
            }
        });
    }
    return parts;
}

Tensor channel_concat(Tape& tape, const std::vector<Tensor>& parts) {
    if (parts.empty()) throw std::invalid_argument("channel_concat: no parts");
    require_rank4(parts[0], "channel_concat");
    const int n = parts[0].dim(0), h = parts[0].dim(2), w = parts[0].dim(3);
    int c = 0;
    bool needs = false;
    for (const Tensor& p : parts) {
        require_rank4(p, "channel_concat");
        if (p.dim(0) != n || p.dim(2) != h || p.dim(3) != w)
            throw std::invalid_argument(cat("channel_concat: part shape ", shape_str(p.shape()),
                                            " does not match (", n, ",*,", h, ",", w, ")"));
        c += p.dim(1);
        needs = needs || p.requires_grad();
    }
    const size_t plane = static_cast<size_t>(h) * w;
    Tensor out({n, c, h, w});
    int offset = 0;
    for (const Tensor& p : parts) {
        const int s = p.dim(1);
        for (int ni = 0; ni < n; ++ni) {
            const double* src = p.data().data() + static_cast<size_t>(ni) * s * plane;
            double* dst = out.data().data() + (static_cast<size_t>(ni) * c + offset) * plane;
            std::copy(src, src + static_cast<size_t>(s) * plane, dst);
        }
        offset += s;
    }
    out.set_requires_grad(needs);
    if (needs) {
        std::vector<Tensor> ins = parts;
        Tensor y = out;
        tape.record([ins, y, n, c, plane]() mutable {
            if (!y.has_grad()) return;
            const auto& dy = y.grad_view();
            int off = 0;
            for (Tensor& p : ins) {
                const int s = p.dim(1);
                if (p.requires_grad()) {
                    auto& dp = p.grad();
                    for (int ni = 0; ni < n; ++ni) {
                        const double* src = dy.data() + (static_cast<size_t>(ni) * c + off) * plane;
                        double* dst = dp.data() + static_cast<size_t>(ni) * s * plane;
                        for (size_t i = 0; i < static_cast<size_t>(s) * plane; ++i)
                            dst[i] += src[i];
                    }
                }
                off += s;
            }
        });
    }
    return out;
}

namespace {

enum class BinOp { Add, Sub, Mul };

Tensor binary_op(Tape& tape, const Tensor& a, const Tensor& b, BinOp op, const char* name) {
    if (!same_shape(a, b))
        throw std::invalid_argument(cat(name, ": shape mismatch ", shape_str(a.shape()), " vs ",
                                        shape_str(b.shape())));
    Tensor out(a.shape());
    const auto& ad = a.data();
    const auto& bd = b.data();
    auto& yd = out.data();
    switch (op) {
        case BinOp::Add:
            for (size_t i = 0; i < ad.size(); ++i) yd[i] = ad[i] + bd[i];
            break;
        case BinOp::Sub:
            for (size_t i = 0; i < ad.size(); ++i) yd[i] = ad[i] - bd[i];
            break;
        case BinOp::Mul:
            for (size_t i = 0; i < ad.size(); ++i) yd[i] = ad[i] * bd[i];
            break;
    }
    const bool needs = a.requires_grad() || b.requires_grad();
    out.set_requires_grad(needs);
    if (needs) {
        Tensor ta = a, tb = b, y = out;
        tape.record([ta, tb, y, op]() mutable {
            if (!y.has_grad()) return;
            const auto& dy = y.grad_view();
            if (ta.requires_grad()) {
                auto& da = ta.grad();
                switch (op) {
                    case BinOp::Add:
                    case BinOp::Sub:
                        for (size_t i = 0; i < dy.size(); ++i) da[i] += dy[i];
                        break;
                    case BinOp::Mul: {
                        const auto& bd = tb.data();
                        for (size_t i = 0; i < dy.size(); ++i) da[i] += dy[i] * bd[i];
                        break;
                    }
                }
            }
            if (tb.requires_grad()) {
                auto& db = tb.grad();
                switch (op) {
                    case BinOp::Add:
                        for (size_t i = 0; i < dy.size(); ++i) db[i] += dy[i];
                        break;
                    case BinOp::Sub:
                        for (size_t i = 0; i < dy.size(); ++i) db[i] -= dy[i];
                        break;
                    case BinOp::Mul: {
                        const auto& ad = ta.data();
                        for (size_t i = 0; i < dy.size(); ++i) db[i] += dy[i] * ad[i];
                        break;
                    }
                }
            }
        });
    }
    return out;
}

}  // namespace

Tensor add(Tape& tape, const Tensor& a, const Tensor& b) {
    return binary_op(tape, a, b, BinOp::Add, "add");
}
Tensor sub(Tape& tape, const Tensor& a, const Tensor& b) {
    return binary_op(tape, a, b, BinOp::Sub, "sub");
}
Tensor mul(Tape& tape, const Tensor& a, const Tensor& b) {
    return binary_op(tape, a, b, BinOp::Mul, "mul");
}

Tensor scalar_mul(Tape& tape, const Tensor& a, double c) {
    Tensor out(a.shape());
    const auto& ad = a.data();
    auto& yd = out.data();
    for (size_t i = 0; i < ad.size(); ++i) yd[i] = ad[i] * c;
    out.set_requires_grad(a.requires_grad());
    if (a.requires_grad()) {
        Tensor ta = a, y = out;
        tape.record([ta, y, c]() mutable {
            if (!y.has_grad()) return;
            const auto& dy = y.grad_view();
            auto& da = ta.grad();
            for (size_t i = 0; i < dy.size(); ++i) da[i] += dy[i] * c;
        });
    }
    return out;
}

Tensor scale_channels(Tape& tape, const Tensor& x, const Tensor& s) {
    require_rank4(x, "scale_channels");
    require_rank4(s, "scale_channels");
    const int n = x.dim(0), c = x.dim(1), h = x.dim(2), w = x.dim(3);
    if (s.dim(0) != n || s.dim(1) != c || s.dim(2) != 1 || s.dim(3) != 1)
        throw std::invalid_argument(cat("scale_channels: scale shape ", shape_str(s.shape()),
                                        " must be (", n, ",", c, ",1,1)"));
    const size_t plane = static_cast<size_t>(h) * w;
    Tensor out(x.shape());
    for (int i = 0; i < n * c; ++i) {
        const double g = s.data()[static_cast<size_t>(i)];
        const double* xr = x.data().data() + static_cast<size_t>(i) * plane;
        double* yr = out.data().data() + static_cast<size_t>(i) * plane;
        for (size_t j = 0; j < plane; ++j) yr[j] = xr[j] * g;
    }
    const bool needs = x.requires_grad() || s.requires_grad();
    out.set_requires_grad(needs);
    if (needs) {
        Tensor tx = x, ts = s, y = out;
        tape.record([tx, ts, y, n, c, plane]() mutable {
            if (!y.has_grad()) return;
            const auto& dy = y.grad_view();
            if (tx.requires_grad()) {
                auto& dx = tx.grad();
                for (int i = 0; i < n * c; ++i) {
                    const double g = ts.data()[static_cast<size_t>(i)];
                    for (size_t j = 0; j < plane; ++j)
                        dx[static_cast<size_t>(i) * plane + j] +=
                            dy[static_cast<size_t>(i) * plane + j] * g;
                }
            }
            if (ts.requires_grad()) {
                auto& ds = ts.grad();
                for (int i = 0; i < n * c; ++i) {
                    double acc = 0.0;
                    const double* xr = tx.data().data() + static_cast<size_t>(i) * plane;
                    for (size_t j = 0; j < plane; ++j)
                        acc += dy[static_cast<size_t>(i) * plane + j] * xr[j];
                    ds[static_cast<size_t>(i)] += acc;
                }
            }
        });
    }
    return out;
}

Tensor reshape(Tape& tape, const Tensor& x, Shape new_shape) {
    if (shape_numel(new_shape) != x.numel())
        throw std::invalid_argument(cat("reshape: cannot view ", shape_str(x.shape()), " as ",
                                        shape_str(new_shape)));
    Tensor out = Tensor::from_data(std::move(new_shape), x.data());
    out.set_requires_grad(x.requires_grad());
    if (x.requires_grad()) {
        Tensor tx = x, y = out;
        tape.record([tx, y]() mutable {
            if (!y.has_grad()) return;
            const auto& dy = y.grad_view();
            auto& dx = tx.grad();
            for (size_t i = 0; i < dy.size(); ++i) dx[i] += dy[i];
        });
    }
    return out;
}

namespace {

Tensor reduce_op(Tape& tape, const Tensor& x, bool take_mean) {
    double acc = 0.0;
    for (double v : x.data()) acc += v;
    const double scale = take_mean ? 1.0 / static_cast<double>(x.numel()) : 1.0;
    Tensor out = Tensor::scalar(acc * scale);
    out.set_requires_grad(x.requires_grad());
    if (x.requires_grad()) {
        Tensor tx = x, y = out;
        tape.record([tx, y, scale]() mutable {
            if (!y.has_grad()) return;
            const double g = y.grad_view()[0] * scale;
            auto& dx = tx.grad();
            for (size_t i = 0; i < dx.size(); ++i) dx[i] += g;
        });
    }
    return out;
}

}  // namespace

Tensor sum(Tape& tape, const Tensor& x) { return reduce_op(tape, x, false); }
Tensor mean(Tape& tape, const Tensor& x) { return reduce_op(tape, x, true); }

Tensor bce_with_logits(Tape& tape, const Tensor& logits, const Tensor& targets) {
    if (!same_shape(logits, targets))
        throw std::invalid_argument(cat("bce_with_logits: shape mismatch ",
                                        shape_str(logits.shape()), " vs ",
                                        shape_str(targets.shape())));
    Tensor out(logits.shape());
    const auto& z = logits.data();
    const auto& t = targets.data();
    auto& y = out.data();
    for (size_t i = 0; i < z.size(); ++i) {
        // softplus(z) - z*t, computed as max(z,0) + log1p(exp(-|z|)) - z*t
        y[i] = std::max(z[i], 0.0) + std::log1p(std::exp(-std::abs(z[i]))) - z[i] * t[i];
    }
    out.set_requires_grad(logits.requires_grad());
    if (logits.requires_grad()) {
        Tensor tz = logits, tt = targets, ty = out;
        tape.record([tz, tt, ty]() mutable {
            if (!ty.has_grad()) return;
            const auto& dy = ty.grad_view();
            const auto& z = tz.data();
            const auto& t = tt.data();
            auto& dz = tz.grad();
            for (size_t i = 0; i < z.size(); ++i) dz[i] += dy[i] * (sigmoid_scalar(z[i]) - t[i]);
        });
    }
    return out;
}

std::string GradCheckResult::describe() const {
    return cat(passed ? "PASS" : "FAIL", " max_rel_error=", max_rel_error, " (tol ", tolerance,
               ") checked=", coords_checked, " failed=", coords_failed,
               coords_failed > 0 ? cat(" worst@", worst_index, " analytic=", worst_analytic,
                                       " numeric=", worst_numeric)
                                 : std::string());
}

GradCheckResult grad_check(const std::function<Tensor(Tape&, const Tensor&)>& fn,
                           const Tensor& input, double h, double tol) {
    if (!(h > 0.0 && h <= 1e-2))
        throw std::invalid_argument(cat("grad_check: step h=", h, " outside (0, 1e-2]"));

    Tensor x = Tensor::from_data(input.shape(), input.data(), true);
    Tape tape;
    Tensor loss = fn(tape, x);
    if (loss.numel() != 1)
        throw std::invalid_argument("grad_check: fn must be scalar-valued");
    tape.backward(loss);
    std::vector<double> analytic = x.grad();

    GradCheckResult res;
    res.tolerance = tol;
    constexpr double kZero = 1e-9;
    for (size_t i = 0; i < x.data().size(); ++i) {
        const double saved = x.data()[i];
        Tape t1, t2;
        Tensor probe = Tensor::from_data(x.shape(), x.data(), false);
        probe.data()[i] = saved + h;
        const double fp = fn(t1, probe).value();
        probe.data()[i] = saved - h;
        const double fm = fn(t2, probe).value();
        const double numeric = (fp - fm) / (2.0 * h);
        const double a = analytic[i];

        double rel = 0.0;
        if (std::abs(a) > kZero || std::abs(numeric) > kZero)
            rel = std::abs(a - numeric) / std::max(std::abs(a), std::abs(numeric));
        ++res.coords_checked;
        if (rel >= tol) ++res.coords_failed;
        if (rel > res.max_rel_error) {
            res.max_rel_error = rel;
            res.worst_index = static_cast<int64_t>(i);
            res.worst_analytic = a;
            res.worst_numeric = numeric;
        }
    }
    res.passed = res.coords_failed == 0;
    return res;
}

}  // namespace scc
