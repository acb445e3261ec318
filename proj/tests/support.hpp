#pragma once

// Shared helpers for the unit tests: seeded random inputs, error measures
// and a scratch directory.

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "bioreg/core.hpp"

namespace testing {

using Rng = std::mt19937_64;

inline bioreg::Grid grid(std::size_t w, std::size_t h, double sx = 1.0, double sy = 1.0) {
    return bioreg::Grid{{w, h}, {sx, sy}};
}

inline double uniform(Rng& rng, double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); }

inline bioreg::ScalarImage2D random_image(Rng& rng, const bioreg::Grid& g, double lo = 0.0, double hi = 1.0) {
    std::vector<double> d(g.count());
    for (auto& v : d) v = uniform(rng, lo, hi);
    return bioreg::ScalarImage2D(g, std::move(d));
}

inline bioreg::DisplacementField2D random_field(Rng& rng, const bioreg::Grid& g, double amp) {
    std::vector<double> a(g.count()), b(g.count());
    for (auto& v : a) v = uniform(rng, -amp, amp);
    for (auto& v : b) v = uniform(rng, -amp, amp);
    return bioreg::DisplacementField2D(g, std::move(a), std::move(b));
}

// Displacements whose sample positions x + u(x) sit well inside bilinear
// cells: every entry is an integer offset in {-1, 0, 1} plus a fraction in
// [0.2, 0.8], in pixel units.
inline bioreg::DisplacementField2D cell_interior_field(Rng& rng, const bioreg::Grid& g) {
    std::uniform_int_distribution<int> shift(-1, 1);
    auto draw = [&](double spacing) {
        std::vector<double> v(g.count());
        for (auto& x : v) x = (shift(rng) + uniform(rng, 0.2, 0.8)) * spacing;
        return v;
    };
    auto a = draw(g.spacing.sx);
    auto b = draw(g.spacing.sy);
    return bioreg::DisplacementField2D(g, std::move(a), std::move(b));
}

inline bioreg::BinaryMask random_mask(Rng& rng, const bioreg::Grid& g, double p = 0.5) {
    std::bernoulli_distribution coin(p);
    std::vector<std::uint8_t> d(g.count());
    for (auto& v : d) v = coin(rng) ? 1 : 0;
    return bioreg::BinaryMask(g, std::move(d));
}

// Axis-aligned rectangle of foreground pixels, rows [r0, r0 + h), cols [c0, c0 + w).
inline bioreg::BinaryMask rect_mask(const bioreg::Grid& g, std::size_t r0, std::size_t c0, std::size_t h,
                                    std::size_t w) {
    bioreg::BinaryMask m(g);
    for (std::size_t i = r0; i < r0 + h; ++i)
        for (std::size_t j = c0; j < c0 + w; ++j) m.set(i, j, true);
    return m;
}

// Owning copy, safe to iterate over a temporary image.
inline std::vector<double> values(const bioreg::ScalarImage2D& img) {
    return {img.data().begin(), img.data().end()};
}

// ||a - b||_2 / ||b||_2 over the listed entries.
inline double rel_error(const std::vector<double>& a, const std::vector<double>& b) {
    double num = 0.0, den = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) {
        num += (a[k] - b[k]) * (a[k] - b[k]);
        den += b[k] * b[k];
    }
    return std::sqrt(num) / std::max(std::sqrt(den), 1e-300);
}

inline double max_abs_diff(std::span<const double> a, std::span<const double> b) {
    double m = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) m = std::max(m, std::abs(a[k] - b[k]));
    return m;
}

class TempDir {
public:
    explicit TempDir(const std::string& tag) {
        static int serial = 0;
        std::random_device rd;
        path_ = std::filesystem::temp_directory_path() /
                ("bioreg_" + tag + "_" + std::to_string(rd()) + "_" + std::to_string(serial++));
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    std::string operator/(const std::string& name) const { return (path_ / name).string(); }
    const std::filesystem::path& path() const { return path_; }

private:
    std::filesystem::path path_;
};

}  // namespace testing
