#pragma once

#include <cmath>

#include "scc/kernels.hpp"

// Per-output-element accumulation routines shared by the serial and OpenMP
// kernel loops. Keeping the element math in one place guarantees the two
// variants produce bit-identical results: parallelism only changes which
// thread computes an element, never the order of the sums inside it.
namespace scc::kernels::detail {

inline double conv_out_elem(const double* x, const double* w, const double* bias,
                            const Conv2dGeom& g, int n, int oc, int oh, int ow) {
    const int icg = g.cin / g.groups;
    const int ocg = g.cout / g.groups;
    const int grp = oc / ocg;
    double acc = bias ? bias[oc] : 0.0;
    for (int ic = 0; ic < icg; ++ic) {
        const double* xc = x + (static_cast<size_t>(n) * g.cin + grp * icg + ic) *
                                   static_cast<size_t>(g.h) * g.w;
        const double* wc = w + (static_cast<size_t>(oc) * icg + ic) * g.k * g.k;
        for (int kh = 0; kh < g.k; ++kh) {
            const int ih = oh * g.stride - g.pad + kh;
            if (ih < 0 || ih >= g.h) continue;
            const double* xrow = xc + static_cast<size_t>(ih) * g.w;
            const double* wrow = wc + static_cast<size_t>(kh) * g.k;
            for (int kw = 0; kw < g.k; ++kw) {
                const int iw = ow * g.stride - g.pad + kw;
                if (iw < 0 || iw >= g.w) continue;
                acc += xrow[iw] * wrow[kw];
            }
        }
    }
    return acc;
}

inline double conv_dx_elem(const double* w, const double* dy, const Conv2dGeom& g, int n, int ic,
                           int ih, int iw) {
    const int icg = g.cin / g.groups;
    const int ocg = g.cout / g.groups;
    const int grp = ic / icg;
    const int icl = ic - grp * icg;
    double acc = 0.0;
    for (int oc = grp * ocg; oc < (grp + 1) * ocg; ++oc) {
        const double* wc = w + (static_cast<size_t>(oc) * icg + icl) * g.k * g.k;
        const double* dyc = dy + (static_cast<size_t>(n) * g.cout + oc) *
                                     static_cast<size_t>(g.hout) * g.wout;
        for (int kh = 0; kh < g.k; ++kh) {
            const int oh_num = ih + g.pad - kh;
            if (oh_num < 0 || oh_num % g.stride != 0) continue;
            const int oh = oh_num / g.stride;
            if (oh >= g.hout) continue;
            for (int kw = 0; kw < g.k; ++kw) {
                const int ow_num = iw + g.pad - kw;
                if (ow_num < 0 || ow_num % g.stride != 0) continue;
                const int ow = ow_num / g.stride;
                if (ow >= g.wout) continue;
                acc += wc[kh * g.k + kw] * dyc[static_cast<size_t>(oh) * g.wout + ow];
            }
        }
    }
    return acc;
}

inline double conv_dw_elem(const double* x, const double* dy, const Conv2dGeom& g, int oc, int icl,
                           int kh, int kw) {
    const int icg = g.cin / g.groups;
    const int ocg = g.cout / g.groups;
    const int grp = oc / ocg;
    const int ic = grp * icg + icl;
    double acc = 0.0;
    for (int n = 0; n < g.n; ++n) {
        const double* xc =
            x + (static_cast<size_t>(n) * g.cin + ic) * static_cast<size_t>(g.h) * g.w;
        const double* dyc =
            dy + (static_cast<size_t>(n) * g.cout + oc) * static_cast<size_t>(g.hout) * g.wout;
        for (int oh = 0; oh < g.hout; ++oh) {
            const int ih = oh * g.stride - g.pad + kh;
            if (ih < 0 || ih >= g.h) continue;
            for (int ow = 0; ow < g.wout; ++ow) {
                const int iw = ow * g.stride - g.pad + kw;
                if (iw < 0 || iw >= g.w) continue;
                acc += xc[static_cast<size_t>(ih) * g.w + iw] *
                       dyc[static_cast<size_t>(oh) * g.wout + ow];
            }
        }
    }
    return acc;
}

inline double conv_db_elem(const double* dy, const Conv2dGeom& g, int oc) {
    double acc = 0.0;
    for (int n = 0; n < g.n; ++n) {
        const double* dyc =
            dy + (static_cast<size_t>(n) * g.cout + oc) * static_cast<size_t>(g.hout) * g.wout;
        for (size_t i = 0; i < static_cast<size_t>(g.hout) * g.wout; ++i) acc += dyc[i];
    }
    return acc;
}

inline void gn_group_forward(const double* x, const double* gamma, const double* beta, double* y,
                             double* mean, double* invstd, const GroupNormGeom& g, int n,
                             int grp) {
    const int cpg = g.c / g.groups;
    const size_t plane = static_cast<size_t>(g.h) * g.w;
    const size_t m = static_cast<size_t>(cpg) * plane;
    const double* xg = x + (static_cast<size_t>(n) * g.c + grp * cpg) * plane;
    double* yg = y + (static_cast<size_t>(n) * g.c + grp * cpg) * plane;

    double sum = 0.0;
    for (size_t i = 0; i < m; ++i) sum += xg[i];
    const double mu = sum / static_cast<double>(m);
    double sq = 0.0;
    for (size_t i = 0; i < m; ++i) {
        const double d = xg[i] - mu;
        sq += d * d;
    }
    const double var = sq / static_cast<double>(m);
    const double is = 1.0 / std::sqrt(var + g.eps);
    mean[static_cast<size_t>(n) * g.groups + grp] = mu;
    invstd[static_cast<size_t>(n) * g.groups + grp] = is;

    for (int cl = 0; cl < cpg; ++cl) {
        const int c = grp * cpg + cl;
        const double ga = gamma[c], be = beta[c];
        const double* xr = xg + static_cast<size_t>(cl) * plane;
        double* yr = yg + static_cast<size_t>(cl) * plane;
        for (size_t i = 0; i < plane; ++i) yr[i] = ga * (xr[i] - mu) * is + be;
    }
}

inline void gn_group_backward_input(const double* x, const double* gamma, const double* dy,
                                    const double* mean, const double* invstd, double* dx,
                                    const GroupNormGeom& g, int n, int grp) {
    const int cpg = g.c / g.groups;
    const size_t plane = static_cast<size_t>(g.h) * g.w;
    const size_t m = static_cast<size_t>(cpg) * plane;
    const size_t base = (static_cast<size_t>(n) * g.c + grp * cpg) * plane;
    const double mu = mean[static_cast<size_t>(n) * g.groups + grp];
    const double is = invstd[static_cast<size_t>(n) * g.groups + grp];

    // dxhat = dy * gamma; dx = is/m * (m*dxhat - sum(dxhat) - xhat*sum(dxhat*xhat))
    double sum_dxhat = 0.0, sum_dxhat_xhat = 0.0;
    for (int cl = 0; cl < cpg; ++cl) {
        const double ga = gamma[grp * cpg + cl];
        const double* xr = x + base + static_cast<size_t>(cl) * plane;
        const double* dyr = dy + base + static_cast<size_t>(cl) * plane;
        for (size_t i = 0; i < plane; ++i) {
            const double dxhat = dyr[i] * ga;
            sum_dxhat += dxhat;
            sum_dxhat_xhat += dxhat * (xr[i] - mu) * is;
        }
    }
    const double md = static_cast<double>(m);
    for (int cl = 0; cl < cpg; ++cl) {
        const double ga = gamma[grp * cpg + cl];
        const double* xr = x + base + static_cast<size_t>(cl) * plane;
        const double* dyr = dy + base + static_cast<size_t>(cl) * plane;
        double* dxr = dx + base + static_cast<size_t>(cl) * plane;
        for (size_t i = 0; i < plane; ++i) {
            const double xhat = (xr[i] - mu) * is;
            const double dxhat = dyr[i] * ga;
            dxr[i] += is / md * (md * dxhat - sum_dxhat - xhat * sum_dxhat_xhat);
        }
    }
}

inline void gn_channel_backward_param(const double* x, const double* dy, const double* mean,
                                      const double* invstd, double* dgamma, double* dbeta,
                                      const GroupNormGeom& g, int c) {
    const int cpg = g.c / g.groups;
    const int grp = c / cpg;
    const size_t plane = static_cast<size_t>(g.h) * g.w;
    double dg = 0.0, db = 0.0;
    for (int n = 0; n < g.n; ++n) {
        const double mu = mean[static_cast<size_t>(n) * g.groups + grp];
        const double is = invstd[static_cast<size_t>(n) * g.groups + grp];
        const double* xr = x + (static_cast<size_t>(n) * g.c + c) * plane;
        const double* dyr = dy + (static_cast<size_t>(n) * g.c + c) * plane;
        for (size_t i = 0; i < plane; ++i) {
            dg += dyr[i] * (xr[i] - mu) * is;
            db += dyr[i];
        }
    }
    dgamma[c] += dg;
    dbeta[c] += db;
}

inline void softmax_slice_forward(const double* x, double* y, const SoftmaxGeom& g, size_t outer,
                                  size_t inner) {
    const double* xs = x + outer * g.len * g.inner + inner;
    double* ys = y + outer * g.len * g.inner + inner;
    double mx = xs[0];
    for (size_t i = 1; i < g.len; ++i) mx = std::max(mx, xs[i * g.inner]);
    double sum = 0.0;
    for (size_t i = 0; i < g.len; ++i) {
        const double e = std::exp(xs[i * g.inner] - mx);
        ys[i * g.inner] = e;
        sum += e;
    }
    for (size_t i = 0; i < g.len; ++i) ys[i * g.inner] /= sum;
}

inline void softmax_slice_backward(const double* y, const double* dy, double* dx,
                                   const SoftmaxGeom& g, size_t outer, size_t inner) {
    const double* ys = y + outer * g.len * g.inner + inner;
    const double* dys = dy + outer * g.len * g.inner + inner;
    double* dxs = dx + outer * g.len * g.inner + inner;
    double dot = 0.0;
    for (size_t i = 0; i < g.len; ++i) dot += dys[i * g.inner] * ys[i * g.inner];
    for (size_t i = 0; i < g.len; ++i)
        dxs[i * g.inner] += ys[i * g.inner] * (dys[i * g.inner] - dot);
}

}  // namespace scc::kernels::detail
