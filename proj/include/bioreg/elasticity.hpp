#pragma once

#include <array>
#include <vector>

#include "bioreg/core.hpp"

namespace bioreg {

using Matrix3 = std::array<std::array<double, 3>, 3>;

/// Isotropic plane material. E is kept at 1 unless explicitly changed;
/// nu is the tunable hyperparameter.
struct Material {
    double E = 1.0;
    double nu = 0.4;
};

/// Throws InvalidMaterial unless E > 0 and 0 <= nu < 0.5.
void validate_material(const Material& m);

/// Compliance matrix C^-1 in Voigt order (e11, e22, e12):
///   [ 1/E     -nu/E   0          ]
///   [ -nu/E   1/E     0          ]
///   [ 0       0       2(1+nu)/E  ]
Matrix3 compliance_matrix(const Material& m);

/// Closed-form inverse of compliance_matrix().
Matrix3 stiffness_matrix(const Material& m);

Matrix3 matmul(const Matrix3& a, const Matrix3& b) noexcept;

// Spatial derivative stencils: central differences in the interior,
// first-order one-sided differences on the first/last column (row),
// divided by the physical spacing. Shared by strain, the L2 baseline and
// the Jacobian determinant so they all agree.

/// d f / d x1 (along columns).
std::vector<double> diff_x1(std::span<const double> f, const Grid& grid);
/// d f / d x2 (along rows).
std::vector<double> diff_x2(std::span<const double> f, const Grid& grid);
/// Adds (d/dx1)^T g, scaled by `scale`, into out.
void diff_x1_adjoint_add(std::span<const double> g, const Grid& grid, double scale, std::span<double> out);
/// Adds (d/dx2)^T g, scaled by `scale`, into out.
void diff_x2_adjoint_add(std::span<const double> g, const Grid& grid, double scale, std::span<double> out);

/// Small-strain tensor in Voigt order. e12 is the tensorial shear
/// 0.5 * (du1/dx2 + du2/dx1), not the engineering shear.
struct StrainField2D {
    Grid grid;
    std::vector<double> e11;
    std::vector<double> e22;
    std::vector<double> e12;
};

StrainField2D strain_tensor(const DisplacementField2D& u);

/// Per-pixel W = 0.5 * e^T C e.
ScalarImage2D strain_energy_density(const StrainField2D& strain, const Matrix3& stiffness);

struct RegTerm {
    double value = 0.0;
    DisplacementField2D grad;
};

struct BimOptions {
    /// Divide value and gradient by the pixel count.
    bool per_pixel = false;
};

/// Root-sum-of-squares of the strain energy image, sqrt(sum W^2), with its
/// exact gradient. At value 0 the gradient is defined as 0.
RegTerm reg_bim(const DisplacementField2D& u, const Material& m, BimOptions opts = {});

/// Mean over pixels of |grad u1|^2 + |grad u2|^2 with its exact gradient.
RegTerm reg_l2grad(const DisplacementField2D& u);

}  // namespace bioreg
