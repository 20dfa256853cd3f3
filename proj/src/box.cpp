#include "scc/box.hpp"

#include <algorithm>
#include <array>
#include <cmath>

namespace scc {

double iou_xyxy(double ax1, double ay1, double ax2, double ay2, double bx1, double by1, double bx2,
                double by2) {
    const double iw = std::min(ax2, bx2) - std::max(ax1, bx1);
    const double ih = std::min(ay2, by2) - std::max(ay1, by1);
    const double inter = std::max(iw, 0.0) * std::max(ih, 0.0);
    const double uni = (ax2 - ax1) * (ay2 - ay1) + (bx2 - bx1) * (by2 - by1) - inter;
    return uni > 0.0 ? inter / uni : 0.0;
}

double iou(const BoxCxcywh& a, const BoxCxcywh& b) {
    return iou_xyxy(a.cx - a.w / 2, a.cy - a.h / 2, a.cx + a.w / 2, a.cy + a.h / 2, b.cx - b.w / 2,
                    b.cy - b.h / 2, b.cx + b.w / 2, b.cy + b.h / 2);
}

namespace {

// Forward-mode dual number with a 4-slot derivative vector; evaluating the
// CIoU formula on these yields the exact partials w.r.t. the pred box.
struct Dual4 {
    double v = 0.0;
    std::array<double, 4> d{{0.0, 0.0, 0.0, 0.0}};

    static Dual4 constant(double c) { return {c, {0, 0, 0, 0}}; }
    static Dual4 seeded(double value, int slot) {
        Dual4 r{value, {0, 0, 0, 0}};
        r.d[static_cast<size_t>(slot)] = 1.0;
        return r;
    }
};

Dual4 operator+(const Dual4& a, const Dual4& b) {
    Dual4 r;
    r.v = a.v + b.v;
    for (int i = 0; i < 4; ++i) r.d[i] = a.d[i] + b.d[i];
    return r;
}
Dual4 operator-(const Dual4& a, const Dual4& b) {
    Dual4 r;
    r.v = a.v - b.v;
    for (int i = 0; i < 4; ++i) r.d[i] = a.d[i] - b.d[i];
    return r;
}
Dual4 operator*(const Dual4& a, const Dual4& b) {
    Dual4 r;
    r.v = a.v * b.v;
    for (int i = 0; i < 4; ++i) r.d[i] = a.d[i] * b.v + a.v * b.d[i];
    return r;
}
Dual4 operator/(const Dual4& a, const Dual4& b) {
    Dual4 r;
    r.v = a.v / b.v;
    for (int i = 0; i < 4; ++i) r.d[i] = (a.d[i] * b.v - a.v * b.d[i]) / (b.v * b.v);
    return r;
}
Dual4 dmax(const Dual4& a, const Dual4& b) { return a.v >= b.v ? a : b; }
Dual4 dmin(const Dual4& a, const Dual4& b) { return a.v <= b.v ? a : b; }
Dual4 datan2(const Dual4& y, const Dual4& x) {
    Dual4 r;
    r.v = std::atan2(y.v, x.v);
    const double denom = y.v * y.v + x.v * x.v;
    for (int i = 0; i < 4; ++i)
        r.d[i] = denom > 0.0 ? (x.v * y.d[i] - y.v * x.d[i]) / denom : 0.0;
    return r;
}

Dual4 ciou_dual(const Dual4& cx, const Dual4& cy, const Dual4& w, const Dual4& h,
                const BoxCxcywh& t) {
    const Dual4 half = Dual4::constant(0.5);
    const Dual4 zero = Dual4::constant(0.0);
    const Dual4 x1 = cx - w * half, x2 = cx + w * half;
    const Dual4 y1 = cy - h * half, y2 = cy + h * half;
    const Dual4 tx1 = Dual4::constant(t.cx - t.w / 2), tx2 = Dual4::constant(t.cx + t.w / 2);
    const Dual4 ty1 = Dual4::constant(t.cy - t.h / 2), ty2 = Dual4::constant(t.cy + t.h / 2);

    const Dual4 cw = dmax(x2, tx2) - dmin(x1, tx1);
    const Dual4 ch = dmax(y2, ty2) - dmin(y1, ty1);
    const Dual4 c2 = cw * cw + ch * ch;
    if (c2.v <= 0.0) return zero;  // both boxes are the same point

    const Dual4 iw = dmax(dmin(x2, tx2) - dmax(x1, tx1), zero);
    const Dual4 ih = dmax(dmin(y2, ty2) - dmax(y1, ty1), zero);
    const Dual4 inter = iw * ih;
    const Dual4 uni = w * h + Dual4::constant(t.w * t.h) - inter;
    const Dual4 iou_d = uni.v > 0.0 ? inter / uni : zero;

    const Dual4 dx = cx - Dual4::constant(t.cx);
    const Dual4 dy = cy - Dual4::constant(t.cy);
    const Dual4 rho2 = dx * dx + dy * dy;

    constexpr double kPi = 3.14159265358979323846;
    const Dual4 angle = Dual4::constant(std::atan2(t.w, t.h)) - datan2(w, h);
    const Dual4 v = Dual4::constant(4.0 / (kPi * kPi)) * angle * angle;
    // alpha enters as a plain number so it stays constant in the gradient
    const double denom = (1.0 - iou_d.v) + v.v;
    const double alpha = denom > 0.0 ? v.v / denom : 0.0;

    return Dual4::constant(1.0) - iou_d + rho2 / c2 + Dual4::constant(alpha) * v;
}

}  // namespace

double ciou_loss(const BoxCxcywh& pred, const BoxCxcywh& target) {
    return ciou_dual(Dual4::constant(pred.cx), Dual4::constant(pred.cy),
                     Dual4::constant(pred.w), Dual4::constant(pred.h), target)
        .v;
}

CiouGrad ciou_loss_with_grad(const BoxCxcywh& pred, const BoxCxcywh& target) {
    const Dual4 out = ciou_dual(Dual4::seeded(pred.cx, 0), Dual4::seeded(pred.cy, 1),
                                Dual4::seeded(pred.w, 2), Dual4::seeded(pred.h, 3), target);
    return {out.v, out.d[0], out.d[1], out.d[2], out.d[3]};
}

}  // namespace scc
