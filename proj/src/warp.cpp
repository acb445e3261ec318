#include "bioreg/warp.hpp"

#include <cmath>

namespace bioreg {

namespace {

struct Axis {
    std::size_t i0;  // lower cell corner
    double frac;     // position inside the cell, [0, 1]
    bool active;     // false when the coordinate was clamped
};

// Cells are [i0, i0 + 1]; the last sample index belongs to the last cell
// with frac = 1 so the interpolant is exact at every grid node.
Axis locate(double pos, std::size_t extent) noexcept {
    const double hi = static_cast<double>(extent - 1);
    bool active = true;
    if (pos < 0.0) {
        pos = 0.0;
        active = false;
    } else if (pos > hi) {
        pos = hi;
        active = false;
    }
    auto i0 = static_cast<std::size_t>(std::floor(pos));
    if (i0 >= extent - 1) i0 = extent - 2;
    return {i0, pos - static_cast<double>(i0), active};
}

}  // namespace

BilinearSample sample_bilinear(const ScalarImage2D& img, double col, double row) noexcept {
    const Axis ax = locate(col, img.width());
    const Axis ay = locate(row, img.height());
    const double a = img(ay.i0, ax.i0);
    const double b = img(ay.i0, ax.i0 + 1);
    const double c = img(ay.i0 + 1, ax.i0);
    const double d = img(ay.i0 + 1, ax.i0 + 1);
    const double fx = ax.frac;
    const double fy = ay.frac;

    BilinearSample s;
    s.value = (1.0 - fy) * ((1.0 - fx) * a + fx * b) + fy * ((1.0 - fx) * c + fx * d);
    if (ax.active) s.d_col = (1.0 - fy) * (b - a) + fy * (d - c);
    if (ay.active) s.d_row = (1.0 - fx) * (c - a) + fx * (d - b);
    return s;
}

WarpResult warp_with_jacobian(const ScalarImage2D& img, const DisplacementField2D& u) {
    require_same_grid(img.grid(), u.grid(), "warp");
    const Spacing sp = img.spacing();
    ScalarImage2D out(img.grid(), 0.0);
    DisplacementField2D jac(img.grid());
    auto j1 = jac.u1();
    auto j2 = jac.u2();
    const auto u1 = u.u1();
    const auto u2 = u.u2();
    for (std::size_t i = 0; i < img.height(); ++i) {
        for (std::size_t j = 0; j < img.width(); ++j) {
            const std::size_t k = img.grid().index(i, j);
            const double col = static_cast<double>(j) + u1[k] / sp.sx;
            const double row = static_cast<double>(i) + u2[k] / sp.sy;
            const BilinearSample s = sample_bilinear(img, col, row);
            out[k] = s.value;
            j1[k] = s.d_col / sp.sx;
            j2[k] = s.d_row / sp.sy;
        }
    }
    return {std::move(out), std::move(jac)};
}

ScalarImage2D warp_image(const ScalarImage2D& img, const DisplacementField2D& u) {
    return warp_with_jacobian(img, u).warped;
}

DisplacementField2D warp_intensity_jacobian(const ScalarImage2D& img, const DisplacementField2D& u) {
    return warp_with_jacobian(img, u).jacobian;
}

ScalarImage2D warp_mask_soft(const BinaryMask& mask, const DisplacementField2D& u) {
    return warp_image(mask.to_image(), u);
}

BinaryMask warp_mask_hard(const BinaryMask& mask, const DisplacementField2D& u) {
    const ScalarImage2D soft = warp_mask_soft(mask, u);
    std::vector<std::uint8_t> bits(soft.size());
    for (std::size_t k = 0; k < soft.size(); ++k) bits[k] = soft[k] >= 0.5 ? 1 : 0;
    return BinaryMask(mask.grid(), std::move(bits));
}

SegMaskSet warp_masks_hard(const SegMaskSet& masks, const DisplacementField2D& u) {
    std::vector<LabeledMask> out;
    out.reserve(masks.size());
    for (const auto& s : masks.structures()) out.push_back({s.label, warp_mask_hard(s.mask, u)});
    return SegMaskSet(masks.grid(), std::move(out));
}

}  // namespace bioreg
