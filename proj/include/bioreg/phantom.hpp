#pragma once

#include <cstdint>
#include <optional>

#include "bioreg/core.hpp"

namespace bioreg {

/// Contracting-annulus phantom. Radii and lengths are in mm and describe
/// the ED (moving) frame; the ES (fixed) frame is the same picture scaled
/// about the centre by (1 - contraction).
struct PhantomSpec {
    GridSize size{96, 96};
    Spacing spacing{};
    std::optional<Point2> center;  // defaults to the grid centre
    double r_inner = 18.0;
    double r_outer = 27.0;
    double contraction = 0.05;
    double pool_level = 1.0;        // blood pool (cavity)
    double ring_level = 0.0;        // myocardium
    double background_level = 0.2;  // surrounding tissue
    double band_width = 9.0;        // bright band just outside r_outer
    double band_level = 1.0;
    double edge_sigma = 1.2;        // Gaussian edge blur
    double margin = 2.0;            // full motion up to r_outer + band + margin
    double taper = 8.0;             // then a smooth fall-off to 0 over this band
    double noise_sigma = 0.0;       // additive Gaussian pixel noise
    std::uint64_t seed = 0;
};

void validate_phantom_spec(const PhantomSpec& spec);

struct PhantomPair {
    ScalarImage2D moving;  // ED
    ScalarImage2D fixed;   // ES
    SegMaskSet moving_masks;  // "myocardium", "cavity"
    SegMaskSet fixed_masks;
    DisplacementField2D u_gt;  // fixed grid -> ED position, pull-back
    BinaryMask roi;            // ES myocardium
};

/// Radial intensity profile of the phantom at distance r from the centre.
double phantom_profile(const PhantomSpec& spec, double r, double scale);

/// Throws InvalidSpec.
PhantomPair make_pair(const PhantomSpec& spec);

struct EndpointError {
    double mean_mm = 0.0;
    double max_mm = 0.0;
};

/// Euclidean |u - u_gt| statistics over the ROI pixels.
EndpointError endpoint_error(const DisplacementField2D& u, const DisplacementField2D& u_gt, const BinaryMask& roi);

/// Mean |u| over all pixels.
double mean_displacement_magnitude(const DisplacementField2D& u);

}  // namespace bioreg
