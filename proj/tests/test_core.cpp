#include <doctest.h>

#include "bioreg/core.hpp"
#include "support.hpp"

using namespace bioreg;
using testing::grid;

namespace {

// One-dimensional example data laid out as two identical rows, since a
// raster needs at least 2x2 pixels.
ScalarImage2D two_rows(const std::vector<double>& row) {
    std::vector<double> d(row);
    d.insert(d.end(), row.begin(), row.end());
    return ScalarImage2D(grid(row.size(), 2), d);
}

}  // namespace

TEST_SUITE("core") {

TEST_CASE("grid validation") {
    CHECK_THROWS_AS(ScalarImage2D(grid(1, 4)), Error);
    CHECK_THROWS_AS(ScalarImage2D(grid(4, 4, 0.0, 1.0)), Error);
    CHECK_THROWS_AS(ScalarImage2D(grid(3, 3), std::vector<double>(8)), Error);
    CHECK_THROWS_AS(DisplacementField2D(grid(2, 2), {0, 0, 0, NAN}, {0, 0, 0, 0}), Error);
    CHECK_THROWS_AS(BinaryMask(grid(2, 2), {0, 1, 2, 0}), Error);
    try {
        require_same_grid(grid(4, 4), grid(4, 4, 1.0, 2.0), "t");
        FAIL("expected GridMismatch");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::GridMismatch);
    }
}

TEST_CASE("normalize_minmax examples") {
    auto a = normalize_minmax(two_rows({0, 2, 4}));
    CHECK(a(0, 0) == 0.0);
    CHECK(a(0, 1) == 0.5);
    CHECK(a(1, 2) == 1.0);

    auto c = normalize_minmax(two_rows({3, 3, 3}));
    for (double v : c.data()) CHECK(v == 0.0);

    auto d = normalize_minmax(two_rows({-1, 0, 3}));
    CHECK(d(0, 0) == 0.0);
    CHECK(d(0, 1) == doctest::Approx(0.25).epsilon(1e-15));
    CHECK(d(0, 2) == 1.0);
}

TEST_CASE("normalize_minmax is idempotent") {
    testing::Rng rng(11);
    for (int t = 0; t < 20; ++t) {
        auto img = testing::random_image(rng, grid(7, 5), -3.0, 9.0);
        auto once = normalize_minmax(img);
        auto twice = normalize_minmax(once);
        CHECK(testing::max_abs_diff(once.data(), twice.data()) <= 1e-12);
        auto [lo, hi] = std::minmax_element(once.data().begin(), once.data().end());
        CHECK(*lo == 0.0);
        CHECK(*hi == 1.0);
    }
}

TEST_CASE("centroid examples") {
    BinaryMask m(grid(6, 6));
    m.set(2, 3, true);
    auto c = centroid(m);
    CHECK(c.x1 == 3.0);
    CHECK(c.x2 == 2.0);

    auto block = testing::rect_mask(grid(4, 4), 0, 0, 2, 2);
    c = centroid(block);
    CHECK(c.x1 == 0.5);
    CHECK(c.x2 == 0.5);

    BinaryMask l(grid(4, 4));
    l.set(0, 0, true);
    l.set(0, 1, true);
    l.set(1, 0, true);
    c = centroid(l);
    CHECK(c.x1 == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
    CHECK(c.x2 == doctest::Approx(1.0 / 3.0).epsilon(1e-15));

    try {
        centroid(BinaryMask(grid(3, 3)));
        FAIL("expected EmptyMask");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::EmptyMask);
    }
}

TEST_CASE("centroid follows whole-pixel translation in mm") {
    const Grid g = grid(12, 10, 0.5, 2.0);
    testing::Rng rng(3);
    for (int t = 0; t < 10; ++t) {
        BinaryMask a(g), b(g);
        const std::size_t di = 2, dj = 3;
        for (std::size_t i = 0; i + di < g.height(); ++i)
            for (std::size_t j = 0; j + dj < g.width(); ++j) {
                const bool on = testing::uniform(rng, 0, 1) < 0.3 || (i == 0 && j == 0);
                a.set(i, j, on);
                b.set(i + di, j + dj, on);
            }
        const auto ca = centroid(a), cb = centroid(b);
        CHECK(cb.x1 - ca.x1 == doctest::Approx(dj * g.spacing.sx).epsilon(1e-12));
        CHECK(cb.x2 - ca.x2 == doctest::Approx(di * g.spacing.sy).epsilon(1e-12));
    }
}

TEST_CASE("crop_centered examples") {
    testing::Rng rng(5);
    auto img = testing::random_image(rng, grid(10, 10));
    auto same = crop_centered(img, {4.5, 4.5}, {10, 10});
    CHECK(testing::max_abs_diff(same.data(), img.data()) == 0.0);

    std::vector<double> ramp(16);
    for (std::size_t k = 0; k < 16; ++k) ramp[k] = static_cast<double>(k);
    ScalarImage2D r(grid(4, 4), ramp);
    auto tl = crop_centered(r, {1.0, 1.0}, {2, 2});
    CHECK(tl(0, 0) == 0.0);
    CHECK(tl(0, 1) == 1.0);
    CHECK(tl(1, 0) == 4.0);
    CHECK(tl(1, 1) == 5.0);

    // Near the bottom-right border the window shifts inside.
    auto br = crop_centered(r, {3.4, 3.6}, {2, 2});
    CHECK(br(0, 0) == 10.0);
    CHECK(br(1, 1) == 15.0);
    auto neg = crop_centered(r, {-5.0, -5.0}, {3, 2});
    CHECK(neg.width() == 3);
    CHECK(neg.height() == 2);
    CHECK(neg(0, 0) == 0.0);

    try {
        crop_centered(r, {1.0, 1.0}, {5, 2});
        FAIL("expected CropTooLarge");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::CropTooLarge);
    }
}

TEST_CASE("crop_centered output has the requested size") {
    testing::Rng rng(8);
    const Grid g = grid(20, 14, 1.5, 0.7);
    auto img = testing::random_image(rng, g);
    auto m = testing::random_mask(rng, g);
    for (int t = 0; t < 30; ++t) {
        const GridSize s{static_cast<std::size_t>(2 + t % 19), static_cast<std::size_t>(2 + t % 13)};
        const Point2 c{testing::uniform(rng, -10, 40), testing::uniform(rng, -10, 20)};
        auto out = crop_centered(img, c, s);
        CHECK(out.grid().size == s);
        CHECK(out.spacing() == g.spacing);
        CHECK(crop_centered(m, c, s).grid().size == s);
    }
}

TEST_CASE("mask set lookup") {
    const Grid g = grid(3, 3);
    SegMaskSet s(g, {{"a", BinaryMask(g)}, {"b", BinaryMask(g)}});
    CHECK(s.labels() == std::vector<std::string>{"a", "b"});
    CHECK_NOTHROW(s.find("b"));
    try {
        s.find("c");
        FAIL("expected LabelMismatch");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::LabelMismatch);
    }
    CHECK_THROWS_AS(SegMaskSet(g, {{"a", BinaryMask(grid(4, 3))}}), Error);
}

}  // TEST_SUITE
