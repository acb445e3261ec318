#include "bioreg/phantom.hpp"

#include <cmath>
#include <numbers>
#include <random>

namespace bioreg {

namespace {

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

Point2 center_of(const PhantomSpec& s) {
    if (s.center) return *s.center;
    return {0.5 * static_cast<double>(s.size.width - 1) * s.spacing.sx,
            0.5 * static_cast<double>(s.size.height - 1) * s.spacing.sy};
}

// Raised-cosine fall-off from 1 at r <= start to 0 at r >= start + width.
double feather(double r, double start, double width) {
    if (r <= start) return 1.0;
    if (r >= start + width) return 0.0;
    return 0.5 * (1.0 + std::cos(std::numbers::pi * (r - start) / width));
}

}  // namespace

void validate_phantom_spec(const PhantomSpec& s) {
    auto bad = [](const std::string& m) { fail(ErrorKind::InvalidSpec, m); };
    if (s.size.width < 2 || s.size.height < 2) bad("phantom grid must be at least 2x2");
    if (!(s.spacing.sx > 0.0) || !(s.spacing.sy > 0.0)) bad("phantom spacing must be positive");
    const double half_extent = 0.5 * std::min(static_cast<double>(s.size.width) * s.spacing.sx,
                                              static_cast<double>(s.size.height) * s.spacing.sy);
    if (!(s.r_inner > 0.0 && s.r_inner < s.r_outer && s.r_outer < half_extent))
        bad("radii must satisfy 0 < r_inner < r_outer < half the grid extent");
    if (!(s.contraction >= 0.0 && s.contraction <= 0.3)) bad("contraction must lie in [0, 0.3]");
    if (!(s.edge_sigma > 0.0)) bad("edge sigma must be positive");
    if (!(s.margin >= 0.0) || !(s.taper > 0.0)) bad("margin must be >= 0 and taper > 0");
    if (!(s.noise_sigma >= 0.0)) bad("noise sigma must be >= 0");
    if (s.pool_level == s.ring_level || s.ring_level == s.background_level)
        bad("pool, ring and background levels must be distinct");
}

double phantom_profile(const PhantomSpec& s, double r, double scale) {
    const double sig = s.edge_sigma * scale;
    // Nested blurred disks, outermost first.
    double v = s.background_level;
    double level = s.background_level;
    if (s.band_width > 0.0) {
        v += (s.band_level - level) * normal_cdf(((s.r_outer + s.band_width) * scale - r) / sig);
        level = s.band_level;
    }
    v += (s.ring_level - level) * normal_cdf((s.r_outer * scale - r) / sig);
    v += (s.pool_level - s.ring_level) * normal_cdf((s.r_inner * scale - r) / sig);
    return v;
}

PhantomPair make_pair(const PhantomSpec& spec) {
    validate_phantom_spec(spec);
    const Grid grid{spec.size, spec.spacing};
    const Point2 c = center_of(spec);
    const double es = 1.0 - spec.contraction;
    const double k = 1.0 / es - 1.0;

    ScalarImage2D moving(grid, 0.0), fixed(grid, 0.0);
    BinaryMask ed_cavity(grid), ed_myo(grid), es_cavity(grid), es_myo(grid);
    DisplacementField2D u(grid);
    auto u1 = u.u1();
    auto u2 = u.u2();

    for (std::size_t i = 0; i < grid.height(); ++i) {
        for (std::size_t j = 0; j < grid.width(); ++j) {
            const double dx = static_cast<double>(j) * spec.spacing.sx - c.x1;
            const double dy = static_cast<double>(i) * spec.spacing.sy - c.x2;
            const double r = std::hypot(dx, dy);
            const std::size_t idx = grid.index(i, j);
            moving[idx] = phantom_profile(spec, r, 1.0);
            fixed[idx] = phantom_profile(spec, r, es);
            ed_cavity.set(i, j, r < spec.r_inner);
            ed_myo.set(i, j, r >= spec.r_inner && r < spec.r_outer);
            es_cavity.set(i, j, r < spec.r_inner * es);
            es_myo.set(i, j, r >= spec.r_inner * es && r < spec.r_outer * es);
            const double f = k * feather(r, spec.r_outer + spec.band_width + spec.margin, spec.taper);
            u1[idx] = f * dx;
            u2[idx] = f * dy;
        }
    }

    if (spec.noise_sigma > 0.0) {
        std::mt19937_64 rng(spec.seed);
        std::normal_distribution<double> noise(0.0, spec.noise_sigma);
        for (auto& v : moving.data()) v += noise(rng);
        for (auto& v : fixed.data()) v += noise(rng);
    }

    PhantomPair p{std::move(moving),
                  std::move(fixed),
                  SegMaskSet(grid, {{"myocardium", ed_myo}, {"cavity", ed_cavity}}),
                  SegMaskSet(grid, {{"myocardium", es_myo}, {"cavity", es_cavity}}),
                  std::move(u),
                  es_myo};
    return p;
}

EndpointError endpoint_error(const DisplacementField2D& u, const DisplacementField2D& u_gt, const BinaryMask& roi) {
    require_same_grid(u.grid(), u_gt.grid(), "endpoint_error");
    require_same_grid(u.grid(), roi.grid(), "endpoint_error roi");
    EndpointError e;
    std::size_t n = 0;
    for (std::size_t k = 0; k < u.size(); ++k) {
        if (!roi[k]) continue;
        const double d = std::hypot(u.u1()[k] - u_gt.u1()[k], u.u2()[k] - u_gt.u2()[k]);
        e.mean_mm += d;
        e.max_mm = std::max(e.max_mm, d);
        ++n;
    }
    if (n == 0) fail(ErrorKind::EmptyMask, "endpoint error over an empty ROI");
    e.mean_mm /= static_cast<double>(n);
    return e;
}

double mean_displacement_magnitude(const DisplacementField2D& u) {
    double s = 0.0;
    for (std::size_t k = 0; k < u.size(); ++k) s += std::hypot(u.u1()[k], u.u2()[k]);
    return s / static_cast<double>(u.size());
}

}  // namespace bioreg
