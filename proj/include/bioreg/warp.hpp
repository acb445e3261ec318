#pragma once

#include "bioreg/core.hpp"

namespace bioreg {

// Pull-back warping: moved(x) = I(x + u(x)), u sampled on the output grid.
// Sample positions outside the image are clamped to the edge; along a
// clamped axis the derivative is 0.

/// Value and derivatives of the bilinear interpolant at a continuous
/// (column, row) index. d_col / d_row are per pixel index, not per mm.
struct BilinearSample {
    double value = 0.0;
    double d_col = 0.0;
    double d_row = 0.0;
};

BilinearSample sample_bilinear(const ScalarImage2D& img, double col, double row) noexcept;

ScalarImage2D warp_image(const ScalarImage2D& img, const DisplacementField2D& u);

/// Per-pixel d(I o u)(x) / d u(x), in intensity per mm. Channel u1 holds
/// the derivative along x1, channel u2 along x2.
DisplacementField2D warp_intensity_jacobian(const ScalarImage2D& img, const DisplacementField2D& u);

struct WarpResult {
    ScalarImage2D warped;
    DisplacementField2D jacobian;
};

/// warp_image and warp_intensity_jacobian in one pass.
WarpResult warp_with_jacobian(const ScalarImage2D& img, const DisplacementField2D& u);

/// Bilinear-warped mask, values in [0, 1].
ScalarImage2D warp_mask_soft(const BinaryMask& mask, const DisplacementField2D& u);

/// Soft warp thresholded at 0.5 (>= 0.5 is foreground).
BinaryMask warp_mask_hard(const BinaryMask& mask, const DisplacementField2D& u);

SegMaskSet warp_masks_hard(const SegMaskSet& masks, const DisplacementField2D& u);

}  // namespace bioreg
