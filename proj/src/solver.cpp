#include "bioreg/solver.hpp"

#include <cmath>

#include "bioreg/warp.hpp"

namespace bioreg {

std::string_view to_string(StopReason r) noexcept {
    return r == StopReason::Converged ? "converged" : "max_iter";
}

void adam_step(const AdamParams& p, AdamState& state, const DisplacementField2D& grad, DisplacementField2D& u) {
    require_same_grid(state.m.grid(), grad.grid(), "adam state");
    require_same_grid(u.grid(), grad.grid(), "adam field");
    ++state.step;
    const double c1 = 1.0 - std::pow(p.beta1, static_cast<double>(state.step));
    const double c2 = 1.0 - std::pow(p.beta2, static_cast<double>(state.step));
    for (std::size_t k = 0; k < grad.entry_count(); ++k) {
        const double g = grad.entry(k);
        double& m = state.m.entry(k);
        double& v = state.v.entry(k);
        m = p.beta1 * m + (1.0 - p.beta1) * g;
        v = p.beta2 * v + (1.0 - p.beta2) * g * g;
        u.entry(k) -= p.learning_rate * (m / c1) / (std::sqrt(v / c2) + p.eps);
    }
}

void validate_solver_config(const SolverConfig& cfg) {
    if (!(cfg.adam.learning_rate > 0.0)) fail(ErrorKind::InvalidArgument, "learning rate must be > 0");
    if (!(cfg.adam.beta1 >= 0.0 && cfg.adam.beta1 < 1.0) || !(cfg.adam.beta2 >= 0.0 && cfg.adam.beta2 < 1.0))
        fail(ErrorKind::InvalidArgument, "Adam betas must lie in [0, 1)");
    if (!(cfg.adam.eps > 0.0)) fail(ErrorKind::InvalidArgument, "Adam eps must be > 0");
    if (cfg.max_iterations < 1) fail(ErrorKind::InvalidArgument, "max iterations must be >= 1");
    if (cfg.window < 1) fail(ErrorKind::InvalidArgument, "stop window must be >= 1");
    if (!(cfg.tolerance >= 0.0)) fail(ErrorKind::InvalidArgument, "stop tolerance must be >= 0");
    validate_loss_config(cfg.loss);
}

namespace {

LossRecord record_of(const LossBreakdown& b) { return {b.total, b.sim, b.reg, b.seg}; }

bool finite(const LossBreakdown& b) {
    return std::isfinite(b.total) && std::isfinite(b.sim) && std::isfinite(b.reg) && std::isfinite(b.seg);
}

SolveResult solve_single(const ScalarImage2D& moving, const ScalarImage2D& fixed,
                         const std::optional<MaskPair>& masks, const SolverConfig& cfg,
                         DisplacementField2D u) {
    SolveResult res;
    AdamState state(u.grid());
    DisplacementField2D best = u;
    double best_total = INFINITY;

    for (int it = 0; it < cfg.max_iterations; ++it) {
        const LossBreakdown b = total_loss(cfg.loss, moving, fixed, masks, u);
        if (!finite(b) || !b.grad.all_finite())
            fail(ErrorKind::NonFiniteLoss, "non-finite loss at iteration " + std::to_string(it) +
                                               " (last finite total " + std::to_string(best_total) + ")");
        res.history.push_back(record_of(b));
        if (b.total < best_total) {
            best_total = b.total;
            best = u;
        }
        const auto n = res.history.size();
        if (n > static_cast<std::size_t>(cfg.window)) {
            const double prev = res.history[n - 1 - cfg.window].total;
            if (std::abs(prev - b.total) <= cfg.tolerance * std::abs(prev)) {
                res.stop = StopReason::Converged;
                break;
            }
        }
        adam_step(cfg.adam, state, b.grad, u);
    }
    res.iterations = static_cast<int>(res.history.size());

    if (res.stop == StopReason::MaxIterations) {
        const LossBreakdown b = total_loss(cfg.loss, moving, fixed, masks, u);
        if (!finite(b)) fail(ErrorKind::NonFiniteLoss, "non-finite loss after the last iteration");
        if (b.total < best_total) {
            best_total = b.total;
            best = u;
        }
    }
    res.final = record_of(total_loss(cfg.loss, moving, fixed, masks, best));
    res.u_star = std::move(best);
    return res;
}

bool can_halve(const Grid& g) { return g.width() >= 4 && g.height() >= 4; }

}  // namespace

ScalarImage2D downsample2(const ScalarImage2D& img) {
    const std::size_t w = img.width() / 2, h = img.height() / 2;
    ScalarImage2D out(Grid{{w, h}, {img.spacing().sx * 2.0, img.spacing().sy * 2.0}}, 0.0);
    for (std::size_t i = 0; i < h; ++i)
        for (std::size_t j = 0; j < w; ++j)
            out(i, j) = 0.25 * (img(2 * i, 2 * j) + img(2 * i, 2 * j + 1) + img(2 * i + 1, 2 * j) +
                                img(2 * i + 1, 2 * j + 1));
    return out;
}

BinaryMask downsample2(const BinaryMask& mask) {
    const ScalarImage2D avg = downsample2(mask.to_image());
    std::vector<std::uint8_t> bits(avg.size());
    for (std::size_t k = 0; k < avg.size(); ++k) bits[k] = avg[k] >= 0.5 ? 1 : 0;
    return BinaryMask(avg.grid(), std::move(bits));
}

DisplacementField2D upsample2(const DisplacementField2D& coarse, const Grid& fine) {
    // Coarse pixel J covers fine pixels 2J and 2J + 1, so fine index j sits
    // at coarse index (j - 0.5) / 2.
    DisplacementField2D out(fine);
    const ScalarImage2D c1(coarse.grid(), std::vector<double>(coarse.u1().begin(), coarse.u1().end()));
    const ScalarImage2D c2(coarse.grid(), std::vector<double>(coarse.u2().begin(), coarse.u2().end()));
    for (std::size_t i = 0; i < fine.height(); ++i) {
        for (std::size_t j = 0; j < fine.width(); ++j) {
            const double col = (static_cast<double>(j) - 0.5) / 2.0;
            const double row = (static_cast<double>(i) - 0.5) / 2.0;
            const std::size_t k = fine.index(i, j);
            out.u1()[k] = sample_bilinear(c1, col, row).value;
            out.u2()[k] = sample_bilinear(c2, col, row).value;
        }
    }
    return out;
}

SolveResult register_pair(const ScalarImage2D& moving, const ScalarImage2D& fixed,
                          const std::optional<MaskPair>& masks, const SolverConfig& cfg) {
    validate_solver_config(cfg);
    require_same_grid(moving.grid(), fixed.grid(), "register images");
    if (masks) {
        require_same_grid(masks->moving.grid(), moving.grid(), "register moving masks");
        require_same_grid(masks->fixed.grid(), moving.grid(), "register fixed masks");
    }

    std::vector<std::string> warnings;
    if (cfg.loss.gamma > 0.0 && !masks)
        warnings.emplace_back("MissingMasks: gamma > 0 but no masks supplied; segmentation term is 0");

    DisplacementField2D init = cfg.initial ? *cfg.initial : DisplacementField2D(moving.grid());
    require_same_grid(init.grid(), moving.grid(), "register initial field");

    if (!cfg.pyramid || !can_halve(moving.grid())) {
        if (cfg.pyramid) warnings.emplace_back("pyramid disabled: grid too small to halve");
        SolveResult res = solve_single(moving, fixed, masks, cfg, std::move(init));
        res.warnings = std::move(warnings);
        return res;
    }

    // Coarse level: initial field is resampled by plain 2x2 averaging.
    std::optional<MaskPair> coarse_masks;
    if (masks) {
        auto shrink = [](const SegMaskSet& s) {
            std::vector<LabeledMask> v;
            for (const auto& m : s.structures()) v.push_back({m.label, downsample2(m.mask)});
            const Grid g = v.empty() ? Grid{{s.grid().width() / 2, s.grid().height() / 2},
                                            {s.grid().spacing.sx * 2, s.grid().spacing.sy * 2}}
                                     : v.front().mask.grid();
            return SegMaskSet(g, std::move(v));
        };
        coarse_masks = MaskPair{shrink(masks->moving), shrink(masks->fixed)};
    }
    const ScalarImage2D cm = downsample2(moving);
    const ScalarImage2D cf = downsample2(fixed);
    const ScalarImage2D i1(init.grid(), std::vector<double>(init.u1().begin(), init.u1().end()));
    const ScalarImage2D i2(init.grid(), std::vector<double>(init.u2().begin(), init.u2().end()));
    const ScalarImage2D ci1 = downsample2(i1), ci2 = downsample2(i2);
    DisplacementField2D coarse_init(cm.grid(), std::vector<double>(ci1.data().begin(), ci1.data().end()),
                                    std::vector<double>(ci2.data().begin(), ci2.data().end()));

    SolveResult coarse = solve_single(cm, cf, coarse_masks, cfg, std::move(coarse_init));
    SolveResult fine = solve_single(moving, fixed, masks, cfg, upsample2(coarse.u_star, moving.grid()));

    fine.history.insert(fine.history.begin(), coarse.history.begin(), coarse.history.end());
    fine.iterations = static_cast<int>(fine.history.size());
    fine.warnings = std::move(warnings);
    return fine;
}

}  // namespace bioreg
