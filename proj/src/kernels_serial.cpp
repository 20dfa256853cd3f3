#include "kernels_detail.hpp"
#include "scc/kernels.hpp"

namespace scc::kernels::serial {

using namespace scc::kernels::detail;

void conv2d_forward(const double* x, const double* w, const double* bias, double* y,
                    const Conv2dGeom& g) {
    for (int n = 0; n < g.n; ++n)
        for (int oc = 0; oc < g.cout; ++oc)
            for (int oh = 0; oh < g.hout; ++oh)
                for (int ow = 0; ow < g.wout; ++ow)
                    y[((static_cast<size_t>(n) * g.cout + oc) * g.hout + oh) * g.wout + ow] =
                        conv_out_elem(x, w, bias, g, n, oc, oh, ow);
}

void conv2d_backward_input(const double* w, const double* dy, double* dx, const Conv2dGeom& g) {
    for (int n = 0; n < g.n; ++n)
        for (int ic = 0; ic < g.cin; ++ic)
            for (int ih = 0; ih < g.h; ++ih)
                for (int iw = 0; iw < g.w; ++iw)
                    dx[((static_cast<size_t>(n) * g.cin + ic) * g.h + ih) * g.w + iw] +=
                        conv_dx_elem(w, dy, g, n, ic, ih, iw);
}

void conv2d_backward_weight(const double* x, const double* dy, double* dw, const Conv2dGeom& g) {
    const int icg = g.cin / g.groups;
    for (int oc = 0; oc < g.cout; ++oc)
        for (int icl = 0; icl < icg; ++icl)
            for (int kh = 0; kh < g.k; ++kh)
                for (int kw = 0; kw < g.k; ++kw)
                    dw[((static_cast<size_t>(oc) * icg + icl) * g.k + kh) * g.k + kw] +=
                        conv_dw_elem(x, dy, g, oc, icl, kh, kw);
}

void conv2d_backward_bias(const double* dy, double* db, const Conv2dGeom& g) {
    for (int oc = 0; oc < g.cout; ++oc) db[oc] += conv_db_elem(dy, g, oc);
}

void group_norm_forward(const double* x, const double* gamma, const double* beta, double* y,
                        double* mean, double* invstd, const GroupNormGeom& g) {
    for (int n = 0; n < g.n; ++n)
        for (int grp = 0; grp < g.groups; ++grp)
            gn_group_forward(x, gamma, beta, y, mean, invstd, g, n, grp);
}

void group_norm_backward_input(const double* x, const double* gamma, const double* dy,
                               const double* mean, const double* invstd, double* dx,
                               const GroupNormGeom& g) {
    for (int n = 0; n < g.n; ++n)
        for (int grp = 0; grp < g.groups; ++grp)
            gn_group_backward_input(x, gamma, dy, mean, invstd, dx, g, n, grp);
}

void group_norm_backward_param(const double* x, const double* dy, const double* mean,
                               const double* invstd, double* dgamma, double* dbeta,
                               const GroupNormGeom& g) {
    for (int c = 0; c < g.c; ++c)
        gn_channel_backward_param(x, dy, mean, invstd, dgamma, dbeta, g, c);
}

void global_avg_pool_forward(const double* x, double* y, int n, int c, int h, int w) {
    const size_t plane = static_cast<size_t>(h) * w;
    for (int i = 0; i < n * c; ++i) {
        const double* xr = x + static_cast<size_t>(i) * plane;
        double sum = 0.0;
        for (size_t j = 0; j < plane; ++j) sum += xr[j];
        y[i] = sum / static_cast<double>(plane);
    }
}

void global_avg_pool_backward(const double* dy, double* dx, int n, int c, int h, int w) {
    const size_t plane = static_cast<size_t>(h) * w;
    for (int i = 0; i < n * c; ++i) {
        const double v = dy[i] / static_cast<double>(plane);
        double* dxr = dx + static_cast<size_t>(i) * plane;
        for (size_t j = 0; j < plane; ++j) dxr[j] += v;
    }
}

void softmax_forward(const double* x, double* y, const SoftmaxGeom& g) {
    for (size_t o = 0; o < g.outer; ++o)
        for (size_t i = 0; i < g.inner; ++i) softmax_slice_forward(x, y, g, o, i);
}

void softmax_backward(const double* y, const double* dy, double* dx, const SoftmaxGeom& g) {
    for (size_t o = 0; o < g.outer; ++o)
        for (size_t i = 0; i < g.inner; ++i) softmax_slice_backward(y, dy, dx, g, o, i);
}

}  // namespace scc::kernels::serial
