#pragma once

namespace scc {

// Axis-aligned box as center + size in normalized image coordinates.
struct BoxCxcywh {
    double cx = 0.0, cy = 0.0, w = 0.0, h = 0.0;
};

// Intersection over union; 0 when the union is empty.
double iou(const BoxCxcywh& a, const BoxCxcywh& b);
double iou_xyxy(double ax1, double ay1, double ax2, double ay2, double bx1, double by1, double bx2,
                double by2);

// Complete-IoU loss between two boxes: 1 - IoU plus the normalized center
// distance and an aspect-ratio penalty whose coupling factor is treated as a
// constant in the gradient. Zero for identical boxes and for the degenerate
// case of two coincident zero-size boxes.
double ciou_loss(const BoxCxcywh& pred, const BoxCxcywh& target);

// d(ciou_loss)/d(pred components), order cx, cy, w, h.
struct CiouGrad {
    double value = 0.0;
    double d_cx = 0.0, d_cy = 0.0, d_w = 0.0, d_h = 0.0;
};
CiouGrad ciou_loss_with_grad(const BoxCxcywh& pred, const BoxCxcywh& target);

}  // namespace scc
