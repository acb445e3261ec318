#pragma once

#include <string>
#include <vector>

#include "bioreg/core.hpp"

namespace bioreg {

/// 2|A and B| / (|A| + |B|); 1 when both are empty.
double dice(const BinaryMask& a, const BinaryMask& b);

/// |A and B| / |A or B|; 1 when both are empty.
double jaccard(const BinaryMask& a, const BinaryMask& b);

using ContourPointSet = std::vector<Point2>;

/// Foreground pixels with at least one background 4-neighbour (outside the
/// image counts as background), at pixel-centre positions in mm.
/// Throws EmptyMask.
ContourPointSet boundary_points(const BinaryMask& mask);

/// Exact symmetric Hausdorff distance between the boundaries, in mm.
double hausdorff(const BinaryMask& a, const BinaryMask& b);

/// Average symmetric surface distance between the boundaries, in mm.
double asd(const BinaryMask& a, const BinaryMask& b);

/// Per-pixel det(I + grad u), with the strain stencils.
ScalarImage2D jacobian_det_map(const DisplacementField2D& u);

struct JacobianStats {
    double mean_abs_dev = 0.0;  // mean |det - 1|
    double std_abs_dev = 0.0;   // population std of |det - 1|
    double min_det = 0.0;
    std::size_t folded = 0;  // pixels with det <= 0
};

JacobianStats jacobian_stats(const ScalarImage2D& det);

struct StructureMetrics {
    std::string label;
    double dice = 0.0;
    double jaccard = 0.0;
    double hd_mm = 0.0;
    double asd_mm = 0.0;
};

struct MetricReport {
    std::vector<StructureMetrics> structures;
    JacobianStats jacobian;
};

/// Hard-warps every moving structure by u and compares it with the fixed
/// structure of the same label.
MetricReport evaluate(const DisplacementField2D& u, const SegMaskSet& moving, const SegMaskSet& fixed);

struct TTestResult {
    double t = 0.0;
    int dof = 0;
    double p = 1.0;  // two-sided
};

/// Regularized incomplete beta I_x(a, b) (continued fraction).
double incomplete_beta(double a, double b, double x);

/// Two-sided p-value of Student's t with `dof` degrees of freedom.
double student_t_two_sided_p(double t, double dof);

/// Paired t-test on x - y. Throws InvalidArgument on length mismatch or
/// n < 2, DegenerateSample when the differences have zero variance.
TTestResult paired_ttest(std::span<const double> x, std::span<const double> y);

}  // namespace bioreg
