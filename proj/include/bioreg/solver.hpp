#pragma once

#include <optional>
#include <string>
#include <vector>

#include "bioreg/objective.hpp"

namespace bioreg {

struct AdamParams {
    double learning_rate = 0.1;  // mm per step
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

struct AdamState {
    DisplacementField2D m;
    DisplacementField2D v;
    long step = 0;

    explicit AdamState(const Grid& grid) : m(grid), v(grid) {}
};

/// One bias-corrected Adam update of `u` in place.
void adam_step(const AdamParams& params, AdamState& state, const DisplacementField2D& grad,
               DisplacementField2D& u);

struct SolverConfig {
    AdamParams adam{};
    int max_iterations = 500;
    /// Stop when |total(t - window) - total(t)| <= tolerance * |total(t - window)|.
    double tolerance = 1e-6;
    int window = 10;
    LossConfig loss{};
    /// Two-level coarse-to-fine schedule.
    bool pyramid = false;
    std::optional<DisplacementField2D> initial;
};

void validate_solver_config(const SolverConfig& cfg);

enum class StopReason { Converged, MaxIterations };
std::string_view to_string(StopReason r) noexcept;

struct LossRecord {
    double total = 0.0;
    double sim = 0.0;
    double reg = 0.0;
    double seg = 0.0;
};

struct SolveResult {
    DisplacementField2D u_star;
    std::vector<LossRecord> history;  // loss at each evaluated iterate
    LossRecord final;                 // loss at u_star
    int iterations = 0;
    StopReason stop = StopReason::MaxIterations;
    std::vector<std::string> warnings;
};

/// Minimizes total_loss over the dense field with Adam. Deterministic.
/// Returns the lowest-loss iterate seen. Throws NonFiniteLoss.
SolveResult register_pair(const ScalarImage2D& moving, const ScalarImage2D& fixed,
                          const std::optional<MaskPair>& masks, const SolverConfig& cfg);

// Pyramid helpers, exposed for testing.
ScalarImage2D downsample2(const ScalarImage2D& img);
BinaryMask downsample2(const BinaryMask& mask);
/// Resamples a coarse field onto `fine` (displacements are in mm, so the
/// values carry over unchanged).
DisplacementField2D upsample2(const DisplacementField2D& coarse, const Grid& fine);

}  // namespace bioreg
