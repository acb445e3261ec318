#include "bioreg/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "bioreg/elasticity.hpp"
#include "bioreg/warp.hpp"

namespace bioreg {

namespace {

struct Overlap {
    std::size_t a = 0, b = 0, both = 0;
};

Overlap overlap(const BinaryMask& a, const BinaryMask& b) {
    require_same_grid(a.grid(), b.grid(), "overlap");
    Overlap o;
    for (std::size_t k = 0; k < a.size(); ++k) {
        o.a += a[k];
        o.b += b[k];
        o.both += a[k] & b[k];
    }
    return o;
}

}  // namespace

double dice(const BinaryMask& a, const BinaryMask& b) {
    const Overlap o = overlap(a, b);
    if (o.a + o.b == 0) return 1.0;
    return 2.0 * static_cast<double>(o.both) / static_cast<double>(o.a + o.b);
}

double jaccard(const BinaryMask& a, const BinaryMask& b) {
    const Overlap o = overlap(a, b);
    const std::size_t uni = o.a + o.b - o.both;
    if (uni == 0) return 1.0;
    return static_cast<double>(o.both) / static_cast<double>(uni);
}

ContourPointSet boundary_points(const BinaryMask& mask) {
    const std::size_t w = mask.width(), h = mask.height();
    const Spacing sp = mask.spacing();
    auto fg = [&](long i, long j) {
        if (i < 0 || j < 0 || i >= static_cast<long>(h) || j >= static_cast<long>(w)) return false;
        return mask(static_cast<std::size_t>(i), static_cast<std::size_t>(j));
    };
    ContourPointSet pts;
    for (long i = 0; i < static_cast<long>(h); ++i) {
        for (long j = 0; j < static_cast<long>(w); ++j) {
            if (!fg(i, j)) continue;
            if (!fg(i - 1, j) || !fg(i + 1, j) || !fg(i, j - 1) || !fg(i, j + 1))
                pts.push_back({static_cast<double>(j) * sp.sx, static_cast<double>(i) * sp.sy});
        }
    }
    if (pts.empty()) fail(ErrorKind::EmptyMask, "boundary of empty mask");
    return pts;
}

namespace {

// Nearest distance from every point of `from` to the set `to`.
std::vector<double> nearest(const ContourPointSet& from, const ContourPointSet& to) {
    std::vector<double> d(from.size());
    for (std::size_t a = 0; a < from.size(); ++a) {
        double best = std::numeric_limits<double>::infinity();
        for (const auto& q : to) {
            const double dx = from[a].x1 - q.x1, dy = from[a].x2 - q.x2;
            best = std::min(best, dx * dx + dy * dy);
        }
        d[a] = std::sqrt(best);
    }
    return d;
}

}  // namespace

double hausdorff(const BinaryMask& a, const BinaryMask& b) {
    require_same_grid(a.grid(), b.grid(), "hausdorff");
    const auto pa = boundary_points(a), pb = boundary_points(b);
    const auto dab = nearest(pa, pb), dba = nearest(pb, pa);
    return std::max(*std::max_element(dab.begin(), dab.end()), *std::max_element(dba.begin(), dba.end()));
}

double asd(const BinaryMask& a, const BinaryMask& b) {
    require_same_grid(a.grid(), b.grid(), "asd");
    const auto pa = boundary_points(a), pb = boundary_points(b);
    double sum = 0.0;
    for (double d : nearest(pa, pb)) sum += d;
    for (double d : nearest(pb, pa)) sum += d;
    return sum / static_cast<double>(pa.size() + pb.size());
}

ScalarImage2D jacobian_det_map(const DisplacementField2D& u) {
    const Grid& g = u.grid();
    const auto a = diff_x1(u.u1(), g);  // du1/dx1
    const auto b = diff_x2(u.u1(), g);  // du1/dx2
    const auto c = diff_x1(u.u2(), g);  // du2/dx1
    const auto d = diff_x2(u.u2(), g);  // du2/dx2
    ScalarImage2D det(g, 0.0);
    for (std::size_t k = 0; k < g.count(); ++k) det[k] = (1.0 + a[k]) * (1.0 + d[k]) - b[k] * c[k];
    return det;
}

JacobianStats jacobian_stats(const ScalarImage2D& det) {
    JacobianStats s;
    const double n = static_cast<double>(det.size());
    s.min_det = std::numeric_limits<double>::infinity();
    for (double v : det.data()) {
        s.mean_abs_dev += std::abs(v - 1.0);
        s.min_det = std::min(s.min_det, v);
        if (v <= 0.0) ++s.folded;
    }
    s.mean_abs_dev /= n;
    double var = 0.0;
    for (double v : det.data()) {
        const double e = std::abs(v - 1.0) - s.mean_abs_dev;
        var += e * e;
    }
    s.std_abs_dev = std::sqrt(var / n);
    return s;
}

MetricReport evaluate(const DisplacementField2D& u, const SegMaskSet& moving, const SegMaskSet& fixed) {
    require_same_grid(moving.grid(), fixed.grid(), "evaluate masks");
    require_same_grid(moving.grid(), u.grid(), "evaluate field");
    if (moving.size() != fixed.size()) fail(ErrorKind::LabelMismatch, "mask sets hold different structure counts");
    MetricReport r;
    for (const auto& s : moving.structures()) {
        const BinaryMask& target = fixed.find(s.label);
        const BinaryMask moved = warp_mask_hard(s.mask, u);
        r.structures.push_back({s.label, dice(moved, target), jaccard(moved, target), hausdorff(moved, target),
                                asd(moved, target)});
    }
    r.jacobian = jacobian_stats(jacobian_det_map(u));
    return r;
}

// Student t distribution

namespace {

// Continued fraction for the incomplete beta function (modified Lentz).
double beta_cf(double a, double b, double x) {
    constexpr int kMaxIter = 300;
    constexpr double kEps = 1e-15;
    constexpr double kTiny = 1e-300;
    const double qab = a + b, qap = a + 1.0, qam = a - 1.0;
    double c = 1.0;
    double d = 1.0 - qab * x / qap;
    if (std::abs(d) < kTiny) d = kTiny;
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m <= kMaxIter; ++m) {
        const double m2 = 2.0 * m;
        double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if (std::abs(d) < kTiny) d = kTiny;
        c = 1.0 + aa / c;
        if (std::abs(c) < kTiny) c = kTiny;
        d = 1.0 / d;
        h *= d * c;
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if (std::abs(d) < kTiny) d = kTiny;
        c = 1.0 + aa / c;
        if (std::abs(c) < kTiny) c = kTiny;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::abs(del - 1.0) < kEps) break;
    }
    return h;
}

}  // namespace

double incomplete_beta(double a, double b, double x) {
    if (!(a > 0.0) || !(b > 0.0)) fail(ErrorKind::InvalidArgument, "incomplete beta needs a, b > 0");
    if (x <= 0.0) return 0.0;
    if (x >= 1.0) return 1.0;
    const double ln_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) + a * std::log(x) +
                            b * std::log1p(-x);
    const double front = std::exp(ln_front);
    // The continued fraction converges fast for x < (a + 1) / (a + b + 2);
    // otherwise use the symmetry I_x(a, b) = 1 - I_{1-x}(b, a).
    if (x < (a + 1.0) / (a + b + 2.0)) return front * beta_cf(a, b, x) / a;
    return 1.0 - front * beta_cf(b, a, 1.0 - x) / b;
}

double student_t_two_sided_p(double t, double dof) {
    if (!(dof > 0.0)) fail(ErrorKind::InvalidArgument, "degrees of freedom must be > 0");
    if (std::isinf(t)) return 0.0;
    return incomplete_beta(0.5 * dof, 0.5, dof / (dof + t * t));
}

TTestResult paired_ttest(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size()) fail(ErrorKind::InvalidArgument, "paired samples differ in length");
    if (x.size() < 2) fail(ErrorKind::InvalidArgument, "paired t-test needs at least 2 pairs");
    const double n = static_cast<double>(x.size());
    double mean = 0.0;
    for (std::size_t k = 0; k < x.size(); ++k) mean += x[k] - y[k];
    mean /= n;
    double ss = 0.0;
    for (std::size_t k = 0; k < x.size(); ++k) {
        const double e = (x[k] - y[k]) - mean;
        ss += e * e;
    }
    const double sd = std::sqrt(ss / (n - 1.0));
    if (!(sd > 0.0)) fail(ErrorKind::DegenerateSample, "differences have zero variance");
    TTestResult r;
    r.t = mean / (sd / std::sqrt(n));
    r.dof = static_cast<int>(x.size()) - 1;
    r.p = student_t_two_sided_p(r.t, r.dof);
    return r;
}

}  // namespace bioreg
