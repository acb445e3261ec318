#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "bioreg/error.hpp"

namespace bioreg {

// Grid convention used everywhere:
//   pixel (i, j) = (row, column), stored at data[i * width + j]
//   physical position (x1, x2) = (j * sx, i * sy) in mm
//   x1 runs horizontally, x2 vertically.

struct Spacing {
    double sx = 1.0;
    double sy = 1.0;

    friend bool operator==(const Spacing&, const Spacing&) = default;
};

struct Point2 {
    double x1 = 0.0;
    double x2 = 0.0;
};

struct GridSize {
    std::size_t width = 0;
    std::size_t height = 0;

    std::size_t count() const noexcept { return width * height; }
    friend bool operator==(const GridSize&, const GridSize&) = default;
};

/// Geometry shared by every raster: extent plus physical pixel spacing.
struct Grid {
    GridSize size;
    Spacing spacing;

    std::size_t width() const noexcept { return size.width; }
    std::size_t height() const noexcept { return size.height; }
    std::size_t count() const noexcept { return size.count(); }
    std::size_t index(std::size_t i, std::size_t j) const noexcept { return i * size.width + j; }

    friend bool operator==(const Grid&, const Grid&) = default;
};

/// Throws InvalidArgument unless width, height >= 2 and spacing > 0.
void validate_grid(const Grid& grid);

/// Throws GridMismatch when the two grids differ in extent or spacing.
void require_same_grid(const Grid& a, const Grid& b, const char* what);

class ScalarImage2D {
public:
    ScalarImage2D() = default;
    ScalarImage2D(Grid grid, std::vector<double> data);
    ScalarImage2D(Grid grid, double fill = 0.0);

    const Grid& grid() const noexcept { return grid_; }
    std::size_t width() const noexcept { return grid_.width(); }
    std::size_t height() const noexcept { return grid_.height(); }
    std::size_t size() const noexcept { return data_.size(); }
    Spacing spacing() const noexcept { return grid_.spacing; }

    double operator()(std::size_t i, std::size_t j) const noexcept { return data_[grid_.index(i, j)]; }
    double& operator()(std::size_t i, std::size_t j) noexcept { return data_[grid_.index(i, j)]; }
    double operator[](std::size_t k) const noexcept { return data_[k]; }
    double& operator[](std::size_t k) noexcept { return data_[k]; }

    std::span<const double> data() const noexcept { return data_; }
    std::span<double> data() noexcept { return data_; }

private:
    Grid grid_;
    std::vector<double> data_;
};

class DisplacementField2D {
public:
    DisplacementField2D() = default;
    explicit DisplacementField2D(Grid grid);
    DisplacementField2D(Grid grid, std::vector<double> u1, std::vector<double> u2);

    const Grid& grid() const noexcept { return grid_; }
    std::size_t width() const noexcept { return grid_.width(); }
    std::size_t height() const noexcept { return grid_.height(); }
    std::size_t size() const noexcept { return u1_.size(); }
    Spacing spacing() const noexcept { return grid_.spacing; }

    std::span<const double> u1() const noexcept { return u1_; }
    std::span<const double> u2() const noexcept { return u2_; }
    std::span<double> u1() noexcept { return u1_; }
    std::span<double> u2() noexcept { return u2_; }

    /// Channel c in {0, 1}; entries 0..size()-1 are u1, the rest u2 when
    /// viewed through entry().
    std::span<const double> channel(int c) const noexcept { return c == 0 ? u1() : u2(); }
    std::span<double> channel(int c) noexcept { return c == 0 ? u1() : u2(); }

    double entry(std::size_t k) const noexcept { return k < size() ? u1_[k] : u2_[k - size()]; }
    double& entry(std::size_t k) noexcept { return k < size() ? u1_[k] : u2_[k - size()]; }
    std::size_t entry_count() const noexcept { return 2 * size(); }

    bool all_finite() const noexcept;

    DisplacementField2D& operator+=(const DisplacementField2D& other);
    DisplacementField2D& operator*=(double s);
    friend DisplacementField2D operator*(double s, DisplacementField2D u) { return u *= s; }

private:
    Grid grid_;
    std::vector<double> u1_;
    std::vector<double> u2_;
};

/// Binary raster, entries in {0, 1}.
class BinaryMask {
public:
    BinaryMask() = default;
    BinaryMask(Grid grid, std::vector<std::uint8_t> data);
    explicit BinaryMask(Grid grid);

    const Grid& grid() const noexcept { return grid_; }
    std::size_t width() const noexcept { return grid_.width(); }
    std::size_t height() const noexcept { return grid_.height(); }
    std::size_t size() const noexcept { return data_.size(); }
    Spacing spacing() const noexcept { return grid_.spacing; }

    bool operator()(std::size_t i, std::size_t j) const noexcept { return data_[grid_.index(i, j)] != 0; }
    void set(std::size_t i, std::size_t j, bool v) noexcept { data_[grid_.index(i, j)] = v ? 1 : 0; }
    std::uint8_t operator[](std::size_t k) const noexcept { return data_[k]; }

    std::span<const std::uint8_t> data() const noexcept { return data_; }
    std::size_t count() const noexcept;

    /// 0/1 valued image on the same grid.
    ScalarImage2D to_image() const;

    friend bool operator==(const BinaryMask&, const BinaryMask&) = default;

private:
    Grid grid_;
    std::vector<std::uint8_t> data_;
};

struct LabeledMask {
    std::string label;
    BinaryMask mask;
};

/// K labeled structures sharing one grid.
class SegMaskSet {
public:
    SegMaskSet() = default;
    SegMaskSet(Grid grid, std::vector<LabeledMask> structures);

    const Grid& grid() const noexcept { return grid_; }
    std::size_t size() const noexcept { return structures_.size(); }
    const std::vector<LabeledMask>& structures() const noexcept { return structures_; }
    const LabeledMask& operator[](std::size_t k) const noexcept { return structures_[k]; }

    /// Throws LabelMismatch when absent.
    const BinaryMask& find(const std::string& label) const;
    std::vector<std::string> labels() const;

private:
    Grid grid_;
    std::vector<LabeledMask> structures_;
};

ScalarImage2D normalize_minmax(const ScalarImage2D& img);

/// Mean physical position of the foreground pixels. Throws EmptyMask.
Point2 centroid(const BinaryMask& mask);

/// Window of `size` whose center pixel is nearest to `center`, shifted to
/// stay inside the image. Throws CropTooLarge when the window cannot fit.
ScalarImage2D crop_centered(const ScalarImage2D& img, Point2 center, GridSize size);
BinaryMask crop_centered(const BinaryMask& mask, Point2 center, GridSize size);

}  // namespace bioreg
