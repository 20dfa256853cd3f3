#include "kernels_detail.hpp"
#include "scc/kernels.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace scc::kernels {

namespace {
bool g_parallel = false;
}

void set_parallel(bool enabled) { g_parallel = enabled; }
bool parallel_enabled() { return g_parallel; }

void set_num_threads(int n) {
#ifdef _OPENMP
    if (n > 0) omp_set_num_threads(n);
#else
    (void)n;
#endif
}

int max_threads() {
#ifdef _OPENMP
    return omp_get_max_threads();
#else
    return 1;
#endif
}

namespace par {

using namespace scc::kernels::detail;

void conv2d_forward(const double* x, const double* w, const double* bias, double* y,
                    const Conv2dGeom& g) {
#pragma omp parallel for collapse(2) schedule(static)
    for (int n = 0; n < g.n; ++n)
        for (int oc = 0; oc < g.cout; ++oc)
            for (int oh = 0; oh < g.hout; ++oh)
                for (int ow = 0; ow < g.wout; ++ow)
                    y[((static_cast<size_t>(n) * g.cout + oc) * g.hout + oh) * g.wout + ow] =
                        conv_out_elem(x, w, bias, g, n, oc, oh, ow);
}

void conv2d_backward_input(const double* w, const double* dy, double* dx, const Conv2dGeom& g) {
#pragma omp parallel for collapse(2) schedule(static)
    for (int n = 0; n < g.n; ++n)
        for (int ic = 0; ic < g.cin; ++ic)
            for (int ih = 0; ih < g.h; ++ih)
                for (int iw = 0; iw < g.w; ++iw)
                    dx[((static_cast<size_t>(n) * g.cin + ic) * g.h + ih) * g.w + iw] +=
                        conv_dx_elem(w, dy, g, n, ic, ih, iw);
}

void conv2d_backward_weight(const double* x, const double* dy, double* dw, const Conv2dGeom& g) {
    const int icg = g.cin / g.groups;
#pragma omp parallel for collapse(2) schedule(static)
    for (int oc = 0; oc < g.cout; ++oc)
        for (int icl = 0; icl < icg; ++icl)
            for (int kh = 0; kh < g.k; ++kh)
                for (int kw = 0; kw < g.k; ++kw)
                    dw[((static_cast<size_t>(oc) * icg + icl) * g.k + kh) * g.k + kw] +=
                        conv_dw_elem(x, dy, g, oc, icl, kh, kw);
}

void conv2d_backward_bias(const double* dy, double* db, const Conv2dGeom& g) {
#pragma omp parallel for schedule(static)
    for (int oc = 0; oc < g.cout; ++oc) db[oc] += conv_db_elem(dy, g, oc);
}

void group_norm_forward(const double* x, const double* gamma, const double* beta, double* y,
                        double* mean, double* invstd, const GroupNormGeom& g) {
#pragma omp parallel for collapse(2) schedule(static)
    for (int n = 0; n < g.n; ++n)
        for (int grp = 0; grp < g.groups; ++grp)
            gn_group_forward(x, gamma, beta, y, mean, invstd, g, n, grp);
}

void group_norm_backward_input(const double* x, const double* gamma, const double* dy,
                               const double* mean, const double* invstd, double* dx,
                               const GroupNormGeom& g) {
#pragma omp parallel for collapse(2) schedule(static)
    for (int n = 0; n < g.n; ++n)
        for (int grp = 0; grp < g.groups; ++grp)
            gn_group_backward_input(x, gamma, dy, mean, invstd, dx, g, n, grp);
}

void group_norm_backward_param(const double* x, const double* dy, const double* mean,
                               const double* invstd, double* dgamma, double* dbeta,
                               const GroupNormGeom& g) {
#pragma omp parallel for schedule(static)
    for (int c = 0; c < g.c; ++c)
        gn_channel_backward_param(x, dy, mean, invstd, dgamma, dbeta, g, c);
}

void global_avg_pool_forward(const double* x, double* y, int n, int c, int h, int w) {
    const size_t plane = static_cast<size_t>(h) * w;
#pragma omp parallel for schedule(static)
    for (int i = 0; i < n * c; ++i) {
        const double* xr = x + static_cast<size_t>(i) * plane;
        double sum = 0.0;
        for (size_t j = 0; j < plane; ++j) sum += xr[j];
        y[i] = sum / static_cast<double>(plane);
    }
}

void global_avg_pool_backward(const double* dy, double* dx, int n, int c, int h, int w) {
    const size_t plane = static_cast<size_t>(h) * w;
#pragma omp parallel for schedule(static)
    for (int i = 0; i < n * c; ++i) {
        const double v = dy[i] / static_cast<double>(plane);
        double* dxr = dx + static_cast<size_t>(i) * plane;
        for (size_t j = 0; j < plane; ++j) dxr[j] += v;
    }
}

void softmax_forward(const double* x, double* y, const SoftmaxGeom& g) {
    const long long total = static_cast<long long>(g.outer) * static_cast<long long>(g.inner);
#pragma omp parallel for schedule(static)
    for (long long t = 0; t < total; ++t)
        softmax_slice_forward(x, y, g, static_cast<size_t>(t) / g.inner,
                              static_cast<size_t>(t) % g.inner);
}

void softmax_backward(const double* y, const double* dy, double* dx, const SoftmaxGeom& g) {
    const long long total = static_cast<long long>(g.outer) * static_cast<long long>(g.inner);
#pragma omp parallel for schedule(static)
    for (long long t = 0; t < total; ++t)
        softmax_slice_backward(y, dy, dx, g, static_cast<size_t>(t) / g.inner,
                               static_cast<size_t>(t) % g.inner);
}

}  // namespace par

#define SCC_DISPATCH(fn, ...)        \
    do {                             \
        if (g_parallel)              \
            par::fn(__VA_ARGS__);    \
        else                         \
            serial::fn(__VA_ARGS__); \
    } while (0)

void conv2d_forward(const double* x, const double* w, const double* bias, double* y,
                    const Conv2dGeom& g) {
    SCC_DISPATCH(conv2d_forward, x, w, bias, y, g);
}
void conv2d_backward_input(const double* w, const double* dy, double* dx, const Conv2dGeom& g) {
    SCC_DISPATCH(conv2d_backward_input, w, dy, dx, g);
}
void conv2d_backward_weight(const double* x, const double* dy, double* dw, const Conv2dGeom& g) {
    SCC_DISPATCH(conv2d_backward_weight, x, dy, dw, g);
}
void conv2d_backward_bias(const double* dy, double* db, const Conv2dGeom& g) {
    SCC_DISPATCH(conv2d_backward_bias, dy, db, g);
}
void group_norm_forward(const double* x, const double* gamma, const double* beta, double* y,
                        double* mean, double* invstd, const GroupNormGeom& g) {
    SCC_DISPATCH(group_norm_forward, x, gamma, beta, y, mean, invstd, g);
}
void group_norm_backward_input(const double* x, const double* gamma, const double* dy,
                               const double* mean, const double* invstd, double* dx,
                               const GroupNormGeom& g) {
    SCC_DISPATCH(group_norm_backward_input, x, gamma, dy, mean, invstd, dx, g);
}
void group_norm_backward_param(const double* x, const double* dy, const double* mean,
                               const double* invstd, double* dgamma, double* dbeta,
                               const GroupNormGeom& g) {
    SCC_DISPATCH(group_norm_backward_param, x, dy, mean, invstd, dgamma, dbeta, g);
}
void global_avg_pool_forward(const double* x, double* y, int n, int c, int h, int w) {
    SCC_DISPATCH(global_avg_pool_forward, x, y, n, c, h, w);
}
void global_avg_pool_backward(const double* dy, double* dx, int n, int c, int h, int w) {
    SCC_DISPATCH(global_avg_pool_backward, dy, dx, n, c, h, w);
}
void softmax_forward(const double* x, double* y, const SoftmaxGeom& g) {
    SCC_DISPATCH(softmax_forward, x, y, g);
}
void softmax_backward(const double* y, const double* dy, double* dx, const SoftmaxGeom& g) {
    SCC_DISPATCH(softmax_backward, y, dy, dx, g);
}

#undef SCC_DISPATCH

}  // namespace scc::kernels
