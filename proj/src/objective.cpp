#include "bioreg/objective.hpp"

#include <cmath>

#include "bioreg/warp.hpp"

namespace bioreg {

std::string_view to_string(RegularizerKind kind) noexcept {
    switch (kind) {
        case RegularizerKind::Bim: return "bim";
        case RegularizerKind::L2Grad: return "l2";
        case RegularizerKind::None: return "none";
    }
    return "none";
}

RegularizerKind parse_regularizer(std::string_view name) {
    if (name == "bim") return RegularizerKind::Bim;
    if (name == "l2" || name == "l2grad") return RegularizerKind::L2Grad;
    if (name == "none") return RegularizerKind::None;
    fail(ErrorKind::InvalidArgument, "unknown regularizer '" + std::string(name) + "'");
}

void validate_loss_config(const LossConfig& cfg) {
    if (!(cfg.lambda >= 0.0)) fail(ErrorKind::InvalidArgument, "lambda must be >= 0");
    if (!(cfg.gamma >= 0.0)) fail(ErrorKind::InvalidArgument, "gamma must be >= 0");
    if (!(cfg.dice_eps > 0.0)) fail(ErrorKind::InvalidArgument, "dice smoothing must be > 0");
    validate_material(cfg.material);
}

TermValue loss_sim(const ScalarImage2D& fixed, const ScalarImage2D& moving, const DisplacementField2D& u) {
    require_same_grid(fixed.grid(), moving.grid(), "loss_sim images");
    const WarpResult w = warp_with_jacobian(moving, u);
    const double n = static_cast<double>(fixed.size());
    TermValue out{0.0, DisplacementField2D(u.grid())};
    auto g1 = out.grad.u1();
    auto g2 = out.grad.u2();
    const auto j1 = w.jacobian.u1();
    const auto j2 = w.jacobian.u2();
    for (std::size_t k = 0; k < fixed.size(); ++k) {
        const double r = fixed[k] - w.warped[k];
        out.value += r * r;
        g1[k] = -2.0 / n * r * j1[k];
        g2[k] = -2.0 / n * r * j2[k];
    }
    out.value /= n;
    return out;
}

double soft_dice(std::span<const double> p, std::span<const double> q, double eps) {
    double pq = 0.0, pp = 0.0, qq = 0.0;
    for (std::size_t k = 0; k < p.size(); ++k) {
        pq += p[k] * q[k];
        pp += p[k] * p[k];
        qq += q[k] * q[k];
    }
    return (2.0 * pq + eps) / (pp + qq + eps);
}

TermValue loss_seg(const SegMaskSet& moving, const SegMaskSet& fixed, const DisplacementField2D& u, double eps) {
    require_same_grid(moving.grid(), fixed.grid(), "loss_seg masks");
    require_same_grid(moving.grid(), u.grid(), "loss_seg field");
    if (moving.size() != fixed.size()) fail(ErrorKind::LabelMismatch, "mask sets hold different structure counts");

    TermValue out{0.0, DisplacementField2D(u.grid())};
    auto g1 = out.grad.u1();
    auto g2 = out.grad.u2();
    for (const auto& s : moving.structures()) {
        const ScalarImage2D q = fixed.find(s.label).to_image();
        const WarpResult w = warp_with_jacobian(s.mask.to_image(), u);
        const auto p = w.warped.data();

        double pq = 0.0, pp = 0.0, qq = 0.0;
        for (std::size_t k = 0; k < p.size(); ++k) {
            pq += p[k] * q[k];
            pp += p[k] * p[k];
            qq += q[k] * q[k];
        }
        const double num = 2.0 * pq + eps;
        const double den = pp + qq + eps;
        out.value += 1.0 - num / den;

        // d(1 - num/den)/dp_k = -(2 q_k den - num 2 p_k) / den^2
        const auto j1 = w.jacobian.u1();
        const auto j2 = w.jacobian.u2();
        for (std::size_t k = 0; k < p.size(); ++k) {
            const double dp = -(2.0 * q[k] * den - 2.0 * p[k] * num) / (den * den);
            g1[k] += dp * j1[k];
            g2[k] += dp * j2[k];
        }
    }
    return out;
}

LossBreakdown total_loss(const LossConfig& cfg, const ScalarImage2D& moving, const ScalarImage2D& fixed,
                         const std::optional<MaskPair>& masks, const DisplacementField2D& u) {
    validate_loss_config(cfg);
    require_same_grid(moving.grid(), u.grid(), "total_loss");

    TermValue sim = loss_sim(fixed, moving, u);
    LossBreakdown out;
    out.sim = sim.value;
    out.grad = std::move(sim.grad);

    if (cfg.lambda > 0.0 && cfg.regularizer != RegularizerKind::None) {
        RegTerm reg = cfg.regularizer == RegularizerKind::Bim
                          ? reg_bim(u, cfg.material, BimOptions{cfg.bim_per_pixel})
                          : reg_l2grad(u);
        out.reg = reg.value;
        out.grad += cfg.lambda * std::move(reg.grad);
    } else if (cfg.regularizer != RegularizerKind::None) {
        // Reported even when its weight is 0.
        out.reg = cfg.regularizer == RegularizerKind::Bim
                      ? reg_bim(u, cfg.material, BimOptions{cfg.bim_per_pixel}).value
                      : reg_l2grad(u).value;
    }

    if (masks) {
        TermValue seg = loss_seg(masks->moving, masks->fixed, u, cfg.dice_eps);
        out.seg = seg.value;
        if (cfg.gamma > 0.0) out.grad += cfg.gamma * std::move(seg.grad);
    }

    out.total = out.sim + cfg.lambda * out.reg + cfg.gamma * out.seg;
    return out;
}

double fd_partial(const ScalarObjective& f, const DisplacementField2D& u, std::size_t k, double h) {
    if (!(h > 0.0)) fail(ErrorKind::InvalidArgument, "finite-difference step must be positive");
    if (k >= u.entry_count()) fail(ErrorKind::InvalidArgument, "entry index out of range");
    DisplacementField2D probe = u;
    const double x = u.entry(k);
    probe.entry(k) = x + h;
    const double fp = f(probe);
    probe.entry(k) = x - h;
    const double fm = f(probe);
    return (fp - fm) / (2.0 * h);
}

DisplacementField2D fd_gradient(const ScalarObjective& f, const DisplacementField2D& u, double h) {
    if (!(h > 0.0)) fail(ErrorKind::InvalidArgument, "finite-difference step must be positive");
    DisplacementField2D grad(u.grid());
    DisplacementField2D probe = u;
    for (std::size_t k = 0; k < u.entry_count(); ++k) {
        const double x = u.entry(k);
        probe.entry(k) = x + h;
        const double fp = f(probe);
        probe.entry(k) = x - h;
        const double fm = f(probe);
        probe.entry(k) = x;
        grad.entry(k) = (fp - fm) / (2.0 * h);
    }
    return grad;
}

}  // namespace bioreg
