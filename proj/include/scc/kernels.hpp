#pragma once

#include <cstddef>

// Dense compute kernels behind the tensor ops. Every kernel exists twice:
// kernels::serial is the reference implementation, and the dispatching
// functions in kernels:: switch to the OpenMP variants when parallel mode is
// on. The parallel variants are written in gather form -- each thread owns a
// disjoint set of output elements and the per-element accumulation order is
// identical to the serial loop -- so serial and parallel results are
// bit-identical. Backward kernels accumulate (+=) into their gradient buffers.
namespace scc::kernels {

void set_parallel(bool enabled);
bool parallel_enabled();
void set_num_threads(int n);  // 0 = library default
int max_threads();

struct Conv2dGeom {
    int n, cin, h, w;  // input
    int cout, k;       // filter bank (square kernel)
    int stride, pad, groups;
    int hout, wout;
};

struct GroupNormGeom {
    int n, c, h, w;
    int groups;
    double eps;
};

struct SoftmaxGeom {
    // A tensor viewed as (outer, len, inner) with softmax along the middle.
    size_t outer, len, inner;
};

void conv2d_forward(const double* x, const double* w, const double* bias, double* y,
                    const Conv2dGeom& g);
void conv2d_backward_input(const double* w, const double* dy, double* dx, const Conv2dGeom& g);
void conv2d_backward_weight(const double* x, const double* dy, double* dw, const Conv2dGeom& g);
void conv2d_backward_bias(const double* dy, double* db, const Conv2dGeom& g);

// Saves per-(sample, group) mean and inverse stddev for the backward pass.
void group_norm_forward(const double* x, const double* gamma, const double* beta, double* y,
                        double* mean, double* invstd, const GroupNormGeom& g);
void group_norm_backward_input(const double* x, const double* gamma, const double* dy,
                               const double* mean, const double* invstd, double* dx,
                               const GroupNormGeom& g);
void group_norm_backward_param(const double* x, const double* dy, const double* mean,
                               const double* invstd, double* dgamma, double* dbeta,
                               const GroupNormGeom& g);

void global_avg_pool_forward(const double* x, double* y, int n, int c, int h, int w);
void global_avg_pool_backward(const double* dy, double* dx, int n, int c, int h, int w);

void softmax_forward(const double* x, double* y, const SoftmaxGeom& g);
void softmax_backward(const double* y, const double* dy, double* dx, const SoftmaxGeom& g);

namespace serial {
void conv2d_forward(const double* x, const double* w, const double* bias, double* y,
                    const Conv2dGeom& g);
void conv2d_backward_input(const double* w, const double* dy, double* dx, const Conv2dGeom& g);
void conv2d_backward_weight(const double* x, const double* dy, double* dw, const Conv2dGeom& g);
void conv2d_backward_bias(const double* dy, double* db, const Conv2dGeom& g);
void group_norm_forward(const double* x, const double* gamma, const double* beta, double* y,
                        double* mean, double* invstd, const GroupNormGeom& g);
void group_norm_backward_input(const double* x, const double* gamma, const double* dy,
                               const double* mean, const double* invstd, double* dx,
                               const GroupNormGeom& g);
void group_norm_backward_param(const double* x, const double* dy, const double* mean,
                               const double* invstd, double* dgamma, double* dbeta,
                               const GroupNormGeom& g);
void global_avg_pool_forward(const double* x, double* y, int n, int c, int h, int w);
void global_avg_pool_backward(const double* dy, double* dx, int n, int c, int h, int w);
void softmax_forward(const double* x, double* y, const SoftmaxGeom& g);
void softmax_backward(const double* y, const double* dy, double* dx, const SoftmaxGeom& g);
}  // namespace serial

namespace par {
void conv2d_forward(const double* x, const double* w, const double* bias, double* y,
                    const Conv2dGeom& g);
void conv2d_backward_input(const double* w, const double* dy, double* dx, const Conv2dGeom& g);
void conv2d_backward_weight(const double* x, const double* dy, double* dw, const Conv2dGeom& g);
void conv2d_backward_bias(const double* dy, double* db, const Conv2dGeom& g);
void group_norm_forward(const double* x, const double* gamma, const double* beta, double* y,
                        double* mean, double* invstd, const GroupNormGeom& g);
void group_norm_backward_input(const double* x, const double* gamma, const double* dy,
                               const double* mean, const double* invstd, double* dx,
                               const GroupNormGeom& g);
void group_norm_backward_param(const double* x, const double* dy, const double* mean,
                               const double* invstd, double* dgamma, double* dbeta,
                               const GroupNormGeom& g);
void global_avg_pool_forward(const double* x, double* y, int n, int c, int h, int w);
void global_avg_pool_backward(const double* dy, double* dx, int n, int c, int h, int w);
void softmax_forward(const double* x, double* y, const SoftmaxGeom& g);
void softmax_backward(const double* y, const double* dy, double* dx, const SoftmaxGeom& g);
}  // namespace par

}  // namespace scc::kernels
