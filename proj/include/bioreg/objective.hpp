#pragma once

#include <functional>
#include <optional>

#include "bioreg/core.hpp"
#include "bioreg/elasticity.hpp"

namespace bioreg {

enum class RegularizerKind { Bim, L2Grad, None };

std::string_view to_string(RegularizerKind kind) noexcept;
/// Accepts "bim", "l2" (or "l2grad") and "none". Throws InvalidArgument.
RegularizerKind parse_regularizer(std::string_view name);

struct LossConfig {
    double lambda = 0.05;   // regularizer weight
    double gamma = 0.01;    // segmentation weight
    Material material{};
    RegularizerKind regularizer = RegularizerKind::Bim;
    double dice_eps = 1e-6;
    bool bim_per_pixel = false;
};

void validate_loss_config(const LossConfig& cfg);

struct MaskPair {
    SegMaskSet moving;
    SegMaskSet fixed;
};

struct LossBreakdown {
    double total = 0.0;
    double sim = 0.0;
    double reg = 0.0;
    double seg = 0.0;
    DisplacementField2D grad;
};

struct TermValue {
    double value = 0.0;
    DisplacementField2D grad;
};

/// Mean squared error between the fixed image and the warped moving image.
TermValue loss_sim(const ScalarImage2D& fixed, const ScalarImage2D& moving, const DisplacementField2D& u);

/// (2 sum pq + eps) / (sum p^2 + sum q^2 + eps).
double soft_dice(std::span<const double> p, std::span<const double> q, double eps);

/// Sum over structures of 1 - soft_dice(soft-warped moving mask, fixed mask).
/// Structures are matched by label; both sets must carry the same labels.
TermValue loss_seg(const SegMaskSet& moving, const SegMaskSet& fixed, const DisplacementField2D& u,
                   double eps = 1e-6);

/// sim + lambda * reg + gamma * seg. The seg term is 0 when masks are absent.
LossBreakdown total_loss(const LossConfig& cfg, const ScalarImage2D& moving, const ScalarImage2D& fixed,
                         const std::optional<MaskPair>& masks, const DisplacementField2D& u);

using ScalarObjective = std::function<double(const DisplacementField2D&)>;

/// Central difference (f(u + h e_k) - f(u - h e_k)) / 2h for every entry.
DisplacementField2D fd_gradient(const ScalarObjective& f, const DisplacementField2D& u, double h);

/// Central difference for a single entry k (see DisplacementField2D::entry).
double fd_partial(const ScalarObjective& f, const DisplacementField2D& u, std::size_t k, double h);

}  // namespace bioreg
