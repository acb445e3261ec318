#include "bioreg/elasticity.hpp"

#include <cmath>

namespace bioreg {

void validate_material(const Material& m) {
    if (!(m.E > 0.0) || !std::isfinite(m.E)) fail(ErrorKind::InvalidMaterial, "stiffness E must be positive");
    if (!(m.nu >= 0.0 && m.nu < 0.5)) fail(ErrorKind::InvalidMaterial, "Poisson ratio must lie in [0, 0.5)");
}

Matrix3 compliance_matrix(const Material& m) {
    validate_material(m);
    const double e = m.E;
    return {{{1.0 / e, -m.nu / e, 0.0}, {-m.nu / e, 1.0 / e, 0.0}, {0.0, 0.0, 2.0 * (1.0 + m.nu) / e}}};
}

Matrix3 stiffness_matrix(const Material& m) {
    validate_material(m);
    const double d = m.E / (1.0 - m.nu * m.nu);
    const double g = m.E / (2.0 * (1.0 + m.nu));
    return {{{d, m.nu * d, 0.0}, {m.nu * d, d, 0.0}, {0.0, 0.0, g}}};
}

Matrix3 matmul(const Matrix3& a, const Matrix3& b) noexcept {
    Matrix3 c{};
    for (int r = 0; r < 3; ++r)
        for (int s = 0; s < 3; ++s)
            for (int k = 0; k < 3; ++k) c[r][s] += a[r][k] * b[k][s];
    return c;
}

// Stencils

std::vector<double> diff_x1(std::span<const double> f, const Grid& grid) {
    const std::size_t w = grid.width(), h = grid.height();
    const double inv = 1.0 / grid.spacing.sx;
    const double half = 0.5 * inv;
    std::vector<double> out(f.size());
    for (std::size_t i = 0; i < h; ++i) {
        const double* row = f.data() + i * w;
        double* o = out.data() + i * w;
        o[0] = (row[1] - row[0]) * inv;
        for (std::size_t j = 1; j + 1 < w; ++j) o[j] = (row[j + 1] - row[j - 1]) * half;
        o[w - 1] = (row[w - 1] - row[w - 2]) * inv;
    }
    return out;
}

std::vector<double> diff_x2(std::span<const double> f, const Grid& grid) {
    const std::size_t w = grid.width(), h = grid.height();
    const double inv = 1.0 / grid.spacing.sy;
    const double half = 0.5 * inv;
    std::vector<double> out(f.size());
    for (std::size_t j = 0; j < w; ++j) {
        out[j] = (f[w + j] - f[j]) * inv;
        for (std::size_t i = 1; i + 1 < h; ++i) out[i * w + j] = (f[(i + 1) * w + j] - f[(i - 1) * w + j]) * half;
        out[(h - 1) * w + j] = (f[(h - 1) * w + j] - f[(h - 2) * w + j]) * inv;
    }
    return out;
}

namespace {

// Adjoint of the 1-D stencil along one line of n samples spaced `stride`
// apart. Written as a gather: each output entry sums the stencil rows that
// touch it, in a fixed order.
void line_adjoint_add(const double* g, double* out, std::size_t n, std::size_t stride, double inv) {
    const double half = 0.5 * inv;
    auto G = [&](std::size_t r) { return g[r * stride]; };
    for (std::size_t k = 0; k < n; ++k) {
        double acc = 0.0;
        if (k == 0) acc -= G(0) * inv;
        if (k == 1) acc += G(0) * inv;
        if (k + 3 <= n) acc -= G(k + 1) * half;  // interior row k + 1
        if (k >= 2) acc += G(k - 1) * half;  // interior row k - 1
        if (k == n - 2) acc -= G(n - 1) * inv;
        if (k == n - 1) acc += G(n - 1) * inv;
        out[k * stride] += acc;
    }
}

}  // namespace

void diff_x1_adjoint_add(std::span<const double> g, const Grid& grid, double scale, std::span<double> out) {
    const std::size_t w = grid.width();
    for (std::size_t i = 0; i < grid.height(); ++i)
        line_adjoint_add(g.data() + i * w, out.data() + i * w, w, 1, scale / grid.spacing.sx);
}

void diff_x2_adjoint_add(std::span<const double> g, const Grid& grid, double scale, std::span<double> out) {
    const std::size_t w = grid.width();
    for (std::size_t j = 0; j < w; ++j)
        line_adjoint_add(g.data() + j, out.data() + j, grid.height(), w, scale / grid.spacing.sy);
}

// Strain and energy

StrainField2D strain_tensor(const DisplacementField2D& u) {
    const Grid& g = u.grid();
    StrainField2D s{g, diff_x1(u.u1(), g), diff_x2(u.u2(), g), {}};
    const auto d2u1 = diff_x2(u.u1(), g);
    const auto d1u2 = diff_x1(u.u2(), g);
    s.e12.resize(g.count());
    for (std::size_t k = 0; k < g.count(); ++k) s.e12[k] = 0.5 * (d2u1[k] + d1u2[k]);
    return s;
}

namespace {

struct Voigt {
    double a, b, c;
};

Voigt apply(const Matrix3& C, double e11, double e22, double e12) noexcept {
    return {C[0][0] * e11 + C[0][1] * e22 + C[0][2] * e12,
            C[1][0] * e11 + C[1][1] * e22 + C[1][2] * e12,
            C[2][0] * e11 + C[2][1] * e22 + C[2][2] * e12};
}

}  // namespace

ScalarImage2D strain_energy_density(const StrainField2D& strain, const Matrix3& stiffness) {
    ScalarImage2D w(strain.grid, 0.0);
    for (std::size_t k = 0; k < strain.grid.count(); ++k) {
        const double e11 = strain.e11[k], e22 = strain.e22[k], e12 = strain.e12[k];
        const Voigt s = apply(stiffness, e11, e22, e12);
        w[k] = 0.5 * (e11 * s.a + e22 * s.b + e12 * s.c);
    }
    return w;
}

RegTerm reg_bim(const DisplacementField2D& u, const Material& m, BimOptions opts) {
    const Grid& g = u.grid();
    const Matrix3 C = stiffness_matrix(m);
    const StrainField2D eps = strain_tensor(u);
    const ScalarImage2D W = strain_energy_density(eps, C);

    double sum_sq = 0.0;
    for (double w : W.data()) sum_sq += w * w;
    const double norm = std::sqrt(sum_sq);
    const double scale = opts.per_pixel ? 1.0 / static_cast<double>(g.count()) : 1.0;

    RegTerm out{norm * scale, DisplacementField2D(g)};
    if (norm == 0.0) return out;

    // d norm / d eps = (W / norm) * C eps, per pixel.
    std::vector<double> g11(g.count()), g22(g.count()), g12(g.count());
    for (std::size_t k = 0; k < g.count(); ++k) {
        const double f = W[k] / norm * scale;
        const Voigt s = apply(C, eps.e11[k], eps.e22[k], eps.e12[k]);
        g11[k] = f * s.a;
        g22[k] = f * s.b;
        g12[k] = f * s.c;
    }
    // e11 = D1 u1, e22 = D2 u2, e12 = 0.5 (D2 u1 + D1 u2).
    diff_x1_adjoint_add(g11, g, 1.0, out.grad.u1());
    diff_x2_adjoint_add(g12, g, 0.5, out.grad.u1());
    diff_x2_adjoint_add(g22, g, 1.0, out.grad.u2());
    diff_x1_adjoint_add(g12, g, 0.5, out.grad.u2());
    return out;
}

RegTerm reg_l2grad(const DisplacementField2D& u) {
    const Grid& g = u.grid();
    const double n = static_cast<double>(g.count());
    RegTerm out{0.0, DisplacementField2D(g)};
    for (int c = 0; c < 2; ++c) {
        const auto d1 = diff_x1(u.channel(c), g);
        const auto d2 = diff_x2(u.channel(c), g);
        for (std::size_t k = 0; k < g.count(); ++k) out.value += d1[k] * d1[k] + d2[k] * d2[k];
        diff_x1_adjoint_add(d1, g, 2.0 / n, out.grad.channel(c));
        diff_x2_adjoint_add(d2, g, 2.0 / n, out.grad.channel(c));
    }
    out.value /= n;
    return out;
}

}  // namespace bioreg
