#include <doctest.h>

#include "bioreg/elasticity.hpp"
#include "bioreg/objective.hpp"
#include "support.hpp"

using namespace bioreg;
using testing::grid;

namespace {

// Plane-stress compliance written out independently of the library.
Matrix3 compliance_oracle(double E, double nu) {
    return {{{1.0 / E, -nu / E, 0.0}, {-nu / E, 1.0 / E, 0.0}, {0.0, 0.0, 2.0 * (1.0 + nu) / E}}};
}

// Gauss-Jordan inverse with partial pivoting.
Matrix3 invert(Matrix3 a) {
    Matrix3 inv{{{1, 0, 0}, {0, 1, 0}, {0, 0, 1}}};
    for (int c = 0; c < 3; ++c) {
        int p = c;
        for (int r = c + 1; r < 3; ++r)
            if (std::abs(a[r][c]) > std::abs(a[p][c])) p = r;
        std::swap(a[c], a[p]);
        std::swap(inv[c], inv[p]);
        const double d = a[c][c];
        for (int k = 0; k < 3; ++k) {
            a[c][k] /= d;
            inv[c][k] /= d;
        }
        for (int r = 0; r < 3; ++r) {
            if (r == c) continue;
            const double f = a[r][c];
            for (int k = 0; k < 3; ++k) {
                a[r][k] -= f * a[c][k];
                inv[r][k] -= f * inv[c][k];
            }
        }
    }
    return inv;
}

DisplacementField2D linear_field(const Grid& g, double a11, double a12, double a21, double a22, double c1 = 0,
                                 double c2 = 0) {
    DisplacementField2D u(g);
    for (std::size_t i = 0; i < g.height(); ++i)
        for (std::size_t j = 0; j < g.width(); ++j) {
            const double x1 = static_cast<double>(j) * g.spacing.sx, x2 = static_cast<double>(i) * g.spacing.sy;
            u.u1()[g.index(i, j)] = c1 + a11 * x1 + a12 * x2;
            u.u2()[g.index(i, j)] = c2 + a21 * x1 + a22 * x2;
        }
    return u;
}

std::vector<double> grad_vector(const DisplacementField2D& g) {
    std::vector<double> v;
    for (std::size_t k = 0; k < g.entry_count(); ++k) v.push_back(g.entry(k));
    return v;
}

}  // namespace

TEST_SUITE("elasticity") {

TEST_CASE("stiffness examples") {
    auto c0 = stiffness_matrix({1.0, 0.0});
    CHECK(c0[0][0] == 1.0);
    CHECK(c0[1][1] == 1.0);
    CHECK(c0[2][2] == 0.5);
    CHECK(c0[0][1] == 0.0);

    auto c = stiffness_matrix({1.0, 0.4});
    CHECK(c[0][0] == doctest::Approx(1.190476).epsilon(1e-6));
    CHECK(c[1][1] == doctest::Approx(1.190476).epsilon(1e-6));
    CHECK(c[0][1] == doctest::Approx(0.476190).epsilon(1e-6));
    CHECK(c[1][0] == c[0][1]);
    CHECK(c[2][2] == doctest::Approx(0.357143).epsilon(1e-6));
    CHECK(c[0][2] == 0.0);
    CHECK(c[1][2] == 0.0);
}

TEST_CASE("stiffness is the inverse of the compliance matrix") {
    testing::Rng rng(21);
    for (int t = 0; t < 50; ++t) {
        const double E = testing::uniform(rng, 0.1, 10.0), nu = testing::uniform(rng, 0.0, 0.49);
        const auto c = stiffness_matrix({E, nu});
        const auto s = compliance_matrix({E, nu});
        const auto oracle = compliance_oracle(E, nu);
        const auto inv = invert(oracle);
        const auto prod = matmul(c, oracle);
        for (int r = 0; r < 3; ++r)
            for (int k = 0; k < 3; ++k) {
                CHECK(s[r][k] == doctest::Approx(oracle[r][k]).epsilon(1e-15));
                CHECK(std::abs(prod[r][k] - (r == k ? 1.0 : 0.0)) <= 1e-12);
                CHECK(std::abs(c[r][k] - inv[r][k]) <= 1e-12 * std::max(1.0, std::abs(inv[r][k])));
                CHECK(c[r][k] == c[k][r]);
            }
        // Leading principal minors of an SPD matrix are positive.
        CHECK(c[0][0] > 0.0);
        CHECK(c[0][0] * c[1][1] - c[0][1] * c[1][0] > 0.0);
        CHECK(c[2][2] > 0.0);
    }
}

TEST_CASE("invalid materials") {
    for (Material m : {Material{1.0, 0.5}, Material{1.0, 0.7}, Material{0.0, 0.3}, Material{-1.0, 0.3},
                       Material{1.0, -0.1}}) {
        try {
            stiffness_matrix(m);
            FAIL("expected InvalidMaterial");
        } catch (const Error& e) {
            CHECK(e.kind() == ErrorKind::InvalidMaterial);
        }
    }
}

TEST_CASE("stencils are exact on linear fields and their adjoints are transposes") {
    testing::Rng rng(22);
    const Grid g = grid(9, 6, 0.7, 1.9);
    auto lin = linear_field(g, 0.3, -1.2, 0.0, 0.0);
    for (double v : diff_x1(lin.u1(), g)) CHECK(v == doctest::Approx(0.3).epsilon(1e-13));
    for (double v : diff_x2(lin.u1(), g)) CHECK(v == doctest::Approx(-1.2).epsilon(1e-13));

    for (int t = 0; t < 10; ++t) {
        auto f = testing::random_image(rng, g, -1, 1);
        auto h = testing::random_image(rng, g, -1, 1);
        for (int axis = 0; axis < 2; ++axis) {
            const auto df = axis == 0 ? diff_x1(f.data(), g) : diff_x2(f.data(), g);
            std::vector<double> adj(g.count(), 0.0);
            if (axis == 0) diff_x1_adjoint_add(h.data(), g, 1.0, adj);
            else diff_x2_adjoint_add(h.data(), g, 1.0, adj);
            double lhs = 0.0, rhs = 0.0;
            for (std::size_t k = 0; k < g.count(); ++k) {
                lhs += df[k] * h[k];
                rhs += f[k] * adj[k];
            }
            CHECK(lhs == doctest::Approx(rhs).epsilon(1e-13));
        }
    }
}

TEST_CASE("strain examples") {
    const Grid g = grid(7, 5);
    auto e0 = strain_tensor(DisplacementField2D(g));
    for (std::size_t k = 0; k < g.count(); ++k) CHECK((e0.e11[k] == 0.0 && e0.e22[k] == 0.0 && e0.e12[k] == 0.0));

    auto e = strain_tensor(linear_field(g, 0.04, 0, 0, 0));
    for (std::size_t k = 0; k < g.count(); ++k) {
        CHECK(e.e11[k] == doctest::Approx(0.04).epsilon(1e-14));
        CHECK(e.e22[k] == 0.0);
        CHECK(e.e12[k] == 0.0);
    }

    const double th = 0.01;
    auto r = strain_tensor(linear_field(grid(96, 96), 0, -th, th, 0));
    for (std::size_t k = 0; k < r.e11.size(); ++k) {
        CHECK(r.e11[k] == 0.0);
        CHECK(r.e22[k] == 0.0);
        CHECK(std::abs(r.e12[k]) <= 1e-15);
    }

    // Tensorial shear: u1 = s * x2 gives e12 = s / 2.
    auto sh = strain_tensor(linear_field(g, 0, 0.2, 0, 0));
    for (double v : sh.e12) CHECK(v == doctest::Approx(0.1).epsilon(1e-14));
}

TEST_CASE("energy density examples") {
    const Grid g = grid(2, 2);
    const auto C = stiffness_matrix({1.0, 0.4});
    StrainField2D zero{g, std::vector<double>(4, 0.0), std::vector<double>(4, 0.0), std::vector<double>(4, 0.0)};
    for (double v : testing::values(strain_energy_density(zero, C))) CHECK(v == 0.0);

    StrainField2D a{g, std::vector<double>(4, 0.1), std::vector<double>(4, 0.0), std::vector<double>(4, 0.0)};
    for (double v : testing::values(strain_energy_density(a, C))) CHECK(v == doctest::Approx(0.00595238).epsilon(1e-6));
    StrainField2D b{g, std::vector<double>(4, 0.0), std::vector<double>(4, 0.0), std::vector<double>(4, 0.1)};
    for (double v : testing::values(strain_energy_density(b, C))) CHECK(v == doctest::Approx(0.00178571).epsilon(1e-6));

    testing::Rng rng(23);
    for (int t = 0; t < 20; ++t) {
        auto u = testing::random_field(rng, grid(6, 6), 2.0);
        for (double v : testing::values(strain_energy_density(strain_tensor(u), C))) CHECK(v >= 0.0);
    }
}

TEST_CASE("reg_bim null space") {
    const Material m{};
    const Grid g = grid(96, 96);
    auto z = reg_bim(DisplacementField2D(g), m);
    CHECK(z.value == 0.0);
    for (std::size_t k = 0; k < z.grad.entry_count(); ++k) CHECK(z.grad.entry(k) == 0.0);

    CHECK(reg_bim(linear_field(g, 0, 0, 0, 0, 3.5, -1.25), m).value < 1e-12);
    CHECK(reg_bim(linear_field(g, 0, -0.01, 0.01, 0), m).value < 1e-12);
    CHECK(reg_bim(linear_field(grid(20, 30, 0.5, 2.0), 0, -0.2, 0.2, 0, 1, 2), m).value < 1e-12);
}

TEST_CASE("reg_bim value matches a direct evaluation") {
    // Uniform e11 = a: W = C11 a^2 / 2 on every pixel.
    const Grid g = grid(10, 8);
    const Material m{2.0, 0.3};
    const double a = 0.05;
    const double C11 = m.E / (1 - m.nu * m.nu);
    const double w = 0.5 * C11 * a * a;
    CHECK(reg_bim(linear_field(g, a, 0, 0, 0), m).value ==
          doctest::Approx(std::sqrt(static_cast<double>(g.count())) * w).epsilon(1e-12));
    CHECK(reg_bim(linear_field(g, a, 0, 0, 0), m, BimOptions{true}).value ==
          doctest::Approx(std::sqrt(static_cast<double>(g.count())) * w / g.count()).epsilon(1e-12));
}

TEST_CASE("reg_bim homogeneity and material scaling") {
    testing::Rng rng(24);
    const Material m{};
    for (int t = 0; t < 10; ++t) {
        auto u = testing::random_field(rng, grid(12, 12, 1.0, 0.8), 1.0);
        const double base = reg_bim(u, m).value;
        CHECK(base > 0.0);
        for (double s : {0.5, 2.0, 10.0}) {
            const double v = reg_bim(s * u, m).value;
            CHECK(std::abs(v / base - s * s) <= 1e-10 * s * s);
        }
        for (double k : {0.25, 3.0}) {
            CHECK(reg_bim(u, Material{k, m.nu}).value == doctest::Approx(k * base).epsilon(1e-13));
        }
        auto e = strain_tensor(u);
        auto e2 = strain_tensor(3.0 * u);
        for (std::size_t p = 0; p < e.e11.size(); ++p) CHECK(e2.e12[p] == doctest::Approx(3.0 * e.e12[p]));
    }
}

TEST_CASE("reg_bim gradient matches finite differences") {
    testing::Rng rng(25);
    for (int t = 0; t < 20; ++t) {
        const Grid g = t % 3 ? grid(12, 12) : grid(12, 12, 0.9, 1.4);
        const Material m{testing::uniform(rng, 0.5, 2.0), testing::uniform(rng, 0.0, 0.45)};
        auto u = testing::random_field(rng, g, 1.0);
        auto r = reg_bim(u, m, BimOptions{t % 2 == 1});
        auto fd = fd_gradient([&](const DisplacementField2D& v) { return reg_bim(v, m, BimOptions{t % 2 == 1}).value; },
                              u, 1e-6);
        CHECK(testing::rel_error(grad_vector(r.grad), grad_vector(fd)) < 1e-6);
    }
}

TEST_CASE("reg_l2grad") {
    const Grid g = grid(12, 9);
    CHECK(reg_l2grad(DisplacementField2D(g)).value == 0.0);
    CHECK(reg_l2grad(linear_field(g, 0, 0, 0, 0, -2, 7)).value == 0.0);
    // |grad u1|^2 = a^2 + b^2, |grad u2|^2 = c^2 + d^2 everywhere.
    CHECK(reg_l2grad(linear_field(g, 0.1, 0.2, -0.3, 0.4)).value == doctest::Approx(0.3).epsilon(1e-13));

    testing::Rng rng(26);
    for (int t = 0; t < 20; ++t) {
        auto u = testing::random_field(rng, t % 2 ? grid(12, 12) : grid(12, 12, 1.3, 0.6), 1.0);
        auto r = reg_l2grad(u);
        auto fd = fd_gradient([](const DisplacementField2D& v) { return reg_l2grad(v).value; }, u, 1e-4);
        CHECK(testing::rel_error(grad_vector(r.grad), grad_vector(fd)) < 1e-8);
    }
}

}  // TEST_SUITE
