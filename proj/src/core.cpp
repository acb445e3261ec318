#include "bioreg/core.hpp"

#include <algorithm>
#include <cmath>

namespace bioreg {

std::string_view to_string(ErrorKind kind) noexcept {
    switch (kind) {
        case ErrorKind::InvalidArgument: return "InvalidArgument";
        case ErrorKind::GridMismatch: return "GridMismatch";
        case ErrorKind::EmptyMask: return "EmptyMask";
        case ErrorKind::CropTooLarge: return "CropTooLarge";
        case ErrorKind::InvalidMaterial: return "InvalidMaterial";
        case ErrorKind::LabelMismatch: return "LabelMismatch";
        case ErrorKind::InvalidSpec: return "InvalidSpec";
        case ErrorKind::ParseError: return "ParseError";
        case ErrorKind::NonFiniteLoss: return "NonFiniteLoss";
        case ErrorKind::DegenerateSample: return "DegenerateSample";
    }
    return "Unknown";
}

void fail(ErrorKind kind, const std::string& message) { throw Error(kind, message); }

void validate_grid(const Grid& grid) {
    if (grid.width() < 2 || grid.height() < 2)
        fail(ErrorKind::InvalidArgument, "grid must be at least 2x2");
    if (!(grid.spacing.sx > 0.0) || !(grid.spacing.sy > 0.0))
        fail(ErrorKind::InvalidArgument, "pixel spacing must be positive");
}

void require_same_grid(const Grid& a, const Grid& b, const char* what) {
    if (!(a == b)) fail(ErrorKind::GridMismatch, std::string(what) + ": grids differ in size or spacing");
}

// ScalarImage2D

ScalarImage2D::ScalarImage2D(Grid grid, std::vector<double> data) : grid_(grid), data_(std::move(data)) {
    validate_grid(grid_);
    if (data_.size() != grid_.count()) fail(ErrorKind::InvalidArgument, "image data length != width*height");
}

ScalarImage2D::ScalarImage2D(Grid grid, double fill) : grid_(grid), data_(grid.count(), fill) {
    validate_grid(grid_);
}

// DisplacementField2D

DisplacementField2D::DisplacementField2D(Grid grid)
    : grid_(grid), u1_(grid.count(), 0.0), u2_(grid.count(), 0.0) {
    validate_grid(grid_);
}

DisplacementField2D::DisplacementField2D(Grid grid, std::vector<double> u1, std::vector<double> u2)
    : grid_(grid), u1_(std::move(u1)), u2_(std::move(u2)) {
    validate_grid(grid_);
    if (u1_.size() != grid_.count() || u2_.size() != grid_.count())
        fail(ErrorKind::InvalidArgument, "displacement channel length != width*height");
    if (!all_finite()) fail(ErrorKind::InvalidArgument, "displacement field has non-finite entries");
}

bool DisplacementField2D::all_finite() const noexcept {
    auto finite = [](double v) { return std::isfinite(v); };
    return std::all_of(u1_.begin(), u1_.end(), finite) && std::all_of(u2_.begin(), u2_.end(), finite);
}

DisplacementField2D& DisplacementField2D::operator+=(const DisplacementField2D& other) {
    require_same_grid(grid_, other.grid_, "field addition");
    for (std::size_t k = 0; k < u1_.size(); ++k) {
        u1_[k] += other.u1_[k];
        u2_[k] += other.u2_[k];
    }
    return *this;
}

DisplacementField2D& DisplacementField2D::operator*=(double s) {
    for (auto& v : u1_) v *= s;
    for (auto& v : u2_) v *= s;
    return *this;
}

// BinaryMask

BinaryMask::BinaryMask(Grid grid, std::vector<std::uint8_t> data) : grid_(grid), data_(std::move(data)) {
    validate_grid(grid_);
    if (data_.size() != grid_.count()) fail(ErrorKind::InvalidArgument, "mask data length != width*height");
    for (auto v : data_)
        if (v > 1) fail(ErrorKind::InvalidArgument, "mask entries must be 0 or 1");
}

BinaryMask::BinaryMask(Grid grid) : grid_(grid), data_(grid.count(), 0) { validate_grid(grid_); }

std::size_t BinaryMask::count() const noexcept {
    return static_cast<std::size_t>(std::count(data_.begin(), data_.end(), std::uint8_t{1}));
}

ScalarImage2D BinaryMask::to_image() const {
    std::vector<double> v(data_.begin(), data_.end());
    return ScalarImage2D(grid_, std::move(v));
}

// SegMaskSet

SegMaskSet::SegMaskSet(Grid grid, std::vector<LabeledMask> structures)
    : grid_(grid), structures_(std::move(structures)) {
    validate_grid(grid_);
    for (const auto& s : structures_) require_same_grid(grid_, s.mask.grid(), "mask set");
}

const BinaryMask& SegMaskSet::find(const std::string& label) const {
    for (const auto& s : structures_)
        if (s.label == label) return s.mask;
    fail(ErrorKind::LabelMismatch, "no structure labeled '" + label + "'");
}

std::vector<std::string> SegMaskSet::labels() const {
    std::vector<std::string> out;
    out.reserve(structures_.size());
    for (const auto& s : structures_) out.push_back(s.label);
    return out;
}

// Preprocessing

ScalarImage2D normalize_minmax(const ScalarImage2D& img) {
    auto d = img.data();
    auto [lo, hi] = std::minmax_element(d.begin(), d.end());
    const double mn = *lo;
    const double range = *hi - mn;
    ScalarImage2D out(img.grid(), 0.0);
    if (range > 0.0) {
        for (std::size_t k = 0; k < d.size(); ++k) out[k] = (d[k] - mn) / range;
    }
    return out;
}

Point2 centroid(const BinaryMask& mask) {
    double s1 = 0.0, s2 = 0.0;
    std::size_t n = 0;
    for (std::size_t i = 0; i < mask.height(); ++i) {
        for (std::size_t j = 0; j < mask.width(); ++j) {
            if (!mask(i, j)) continue;
            s1 += static_cast<double>(j);
            s2 += static_cast<double>(i);
            ++n;
        }
    }
    if (n == 0) fail(ErrorKind::EmptyMask, "centroid of empty mask");
    const auto sp = mask.spacing();
    return {s1 / static_cast<double>(n) * sp.sx, s2 / static_cast<double>(n) * sp.sy};
}

namespace {

struct Window {
    std::size_t row0;
    std::size_t col0;
};

Window place_window(const Grid& grid, Point2 center, GridSize size) {
    if (size.width < 2 || size.height < 2) fail(ErrorKind::InvalidArgument, "crop size must be at least 2x2");
    if (size.width > grid.width() || size.height > grid.height())
        fail(ErrorKind::CropTooLarge, "crop window larger than image");
    auto start = [](double pos_mm, double spacing, std::size_t extent, std::size_t win) {
        const double c = std::round(pos_mm / spacing) - static_cast<double>(win / 2);
        const double hi = static_cast<double>(extent - win);
        return static_cast<std::size_t>(std::clamp(c, 0.0, hi));
    };
    return {start(center.x2, grid.spacing.sy, grid.height(), size.height),
            start(center.x1, grid.spacing.sx, grid.width(), size.width)};
}

}  // namespace

ScalarImage2D crop_centered(const ScalarImage2D& img, Point2 center, GridSize size) {
    const Window w = place_window(img.grid(), center, size);
    ScalarImage2D out(Grid{size, img.spacing()}, 0.0);
    for (std::size_t i = 0; i < size.height; ++i)
        for (std::size_t j = 0; j < size.width; ++j) out(i, j) = img(w.row0 + i, w.col0 + j);
    return out;
}

BinaryMask crop_centered(const BinaryMask& mask, Point2 center, GridSize size) {
    const Window w = place_window(mask.grid(), center, size);
    BinaryMask out(Grid{size, mask.spacing()});
    for (std::size_t i = 0; i < size.height; ++i)
        for (std::size_t j = 0; j < size.width; ++j) out.set(i, j, mask(w.row0 + i, w.col0 + j));
    return out;
}

}  // namespace bioreg
