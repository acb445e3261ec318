// Python bindings. Images are (H, W) float64 arrays, fields are (2, H, W)
// with channel 0 = u1 (along columns, x1) and channel 1 = u2 (along rows),
// masks are (H, W) arrays of 0/1. Spacing is (sx, sy) in mm.

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <map>

#include "bioreg/elasticity.hpp"
#include "bioreg/metrics.hpp"
#include "bioreg/objective.hpp"
#include "bioreg/phantom.hpp"
#include "bioreg/solver.hpp"
#include "bioreg/warp.hpp"

namespace py = pybind11;
using namespace bioreg;

namespace {

using Doubles = py::array_t<double, py::array::c_style | py::array::forcecast>;
using Bytes = py::array_t<std::uint8_t, py::array::c_style | py::array::forcecast>;
using SpacingArg = std::pair<double, double>;

Grid grid_of(std::size_t h, std::size_t w, SpacingArg s) {
    Grid g{{w, h}, {s.first, s.second}};
    validate_grid(g);
    return g;
}

ScalarImage2D to_image(const Doubles& a, SpacingArg s) {
    if (a.ndim() != 2) throw Error(ErrorKind::InvalidArgument, "image must be a 2-D array");
    const Grid g = grid_of(a.shape(0), a.shape(1), s);
    return ScalarImage2D(g, std::vector<double>(a.data(), a.data() + a.size()));
}

DisplacementField2D to_field(const Doubles& a, SpacingArg s) {
    if (a.ndim() != 3 || a.shape(0) != 2) throw Error(ErrorKind::InvalidArgument, "field must have shape (2, H, W)");
    const Grid g = grid_of(a.shape(1), a.shape(2), s);
    const double* p = a.data();
    const std::size_t n = g.count();
    return DisplacementField2D(g, std::vector<double>(p, p + n), std::vector<double>(p + n, p + 2 * n));
}

BinaryMask to_mask(const Bytes& a, SpacingArg s) {
    if (a.ndim() != 2) throw Error(ErrorKind::InvalidArgument, "mask must be a 2-D array");
    const Grid g = grid_of(a.shape(0), a.shape(1), s);
    std::vector<std::uint8_t> d(a.data(), a.data() + a.size());
    for (auto& v : d) v = v ? 1 : 0;
    return BinaryMask(g, std::move(d));
}

SegMaskSet to_masks(const std::map<std::string, Bytes>& m, const Grid& g) {
    std::vector<LabeledMask> s;
    for (const auto& [label, a] : m) s.push_back({label, to_mask(a, {g.spacing.sx, g.spacing.sy})});
    return SegMaskSet(g, std::move(s));
}

py::array_t<double> from_image(const ScalarImage2D& img) {
    py::array_t<double> out({img.height(), img.width()});
    std::copy(img.data().begin(), img.data().end(), out.mutable_data());
    return out;
}

py::array_t<double> from_field(const DisplacementField2D& u) {
    py::array_t<double> out({std::size_t{2}, u.height(), u.width()});
    double* p = out.mutable_data();
    std::copy(u.u1().begin(), u.u1().end(), p);
    std::copy(u.u2().begin(), u.u2().end(), p + u.size());
    return out;
}

py::array_t<std::uint8_t> from_mask(const BinaryMask& m) {
    py::array_t<std::uint8_t> out({m.height(), m.width()});
    std::copy(m.data().begin(), m.data().end(), out.mutable_data());
    return out;
}

py::dict from_masks(const SegMaskSet& s) {
    py::dict d;
    for (const auto& lm : s.structures()) d[py::str(lm.label)] = from_mask(lm.mask);
    return d;
}

}  // namespace

PYBIND11_MODULE(_bioreg, m) {
    m.doc() = "Elastic-prior deformable registration of 2-D images";

    static py::exception<Error> exc(m, "BioregError");
    py::register_exception_translator([](std::exception_ptr p) {
        try {
            if (p) std::rethrow_exception(p);
        } catch (const Error& e) {
            PyErr_SetString(exc.ptr(), (std::string(to_string(e.kind())) + ": " + e.what()).c_str());
        }
    });

    m.def(
        "stiffness_matrix",
        [](double E, double nu) {
            const auto c = stiffness_matrix({E, nu});
            return std::vector<std::vector<double>>{{c[0][0], c[0][1], c[0][2]},
                                                    {c[1][0], c[1][1], c[1][2]},
                                                    {c[2][0], c[2][1], c[2][2]}};
        },
        py::arg("E") = 1.0, py::arg("nu") = 0.4);

    m.def(
        "warp_image",
        [](const Doubles& img, const Doubles& u, SpacingArg s) {
            return from_image(warp_image(to_image(img, s), to_field(u, s)));
        },
        py::arg("image"), py::arg("u"), py::arg("spacing") = SpacingArg{1.0, 1.0});

    m.def(
        "reg_bim",
        [](const Doubles& u, double E, double nu, bool per_pixel, SpacingArg s) {
            auto r = reg_bim(to_field(u, s), {E, nu}, BimOptions{per_pixel});
            return py::make_tuple(r.value, from_field(r.grad));
        },
        py::arg("u"), py::arg("E") = 1.0, py::arg("nu") = 0.4, py::arg("per_pixel") = false,
        py::arg("spacing") = SpacingArg{1.0, 1.0});

    m.def(
        "strain_energy",
        [](const Doubles& u, double E, double nu, SpacingArg s) {
            return from_image(strain_energy_density(strain_tensor(to_field(u, s)), stiffness_matrix({E, nu})));
        },
        py::arg("u"), py::arg("E") = 1.0, py::arg("nu") = 0.4, py::arg("spacing") = SpacingArg{1.0, 1.0});

    m.def(
        "jacobian_det",
        [](const Doubles& u, SpacingArg s) { return from_image(jacobian_det_map(to_field(u, s))); }, py::arg("u"),
        py::arg("spacing") = SpacingArg{1.0, 1.0});

    m.def(
        "dice", [](const Bytes& a, const Bytes& b) { return dice(to_mask(a, {1, 1}), to_mask(b, {1, 1})); },
        py::arg("a"), py::arg("b"));
    m.def(
        "jaccard", [](const Bytes& a, const Bytes& b) { return jaccard(to_mask(a, {1, 1}), to_mask(b, {1, 1})); },
        py::arg("a"), py::arg("b"));
    m.def(
        "hausdorff",
        [](const Bytes& a, const Bytes& b, SpacingArg s) { return hausdorff(to_mask(a, s), to_mask(b, s)); },
        py::arg("a"), py::arg("b"), py::arg("spacing") = SpacingArg{1.0, 1.0});
    m.def(
        "asd", [](const Bytes& a, const Bytes& b, SpacingArg s) { return asd(to_mask(a, s), to_mask(b, s)); },
        py::arg("a"), py::arg("b"), py::arg("spacing") = SpacingArg{1.0, 1.0});

    m.def(
        "paired_ttest",
        [](const std::vector<double>& x, const std::vector<double>& y) {
            auto r = paired_ttest(x, y);
            return py::make_tuple(r.t, r.dof, r.p);
        },
        py::arg("x"), py::arg("y"));

    m.def(
        "make_phantom",
        [](std::size_t size, double r_inner, double r_outer, double contraction, double noise,
           std::uint64_t seed) {
            PhantomSpec spec;
            spec.size = {size, size};
            spec.r_inner = r_inner;
            spec.r_outer = r_outer;
            spec.contraction = contraction;
            spec.noise_sigma = noise;
            spec.seed = seed;
            auto p = make_pair(spec);
            py::dict d;
            d["moving"] = from_image(p.moving);
            d["fixed"] = from_image(p.fixed);
            d["moving_masks"] = from_masks(p.moving_masks);
            d["fixed_masks"] = from_masks(p.fixed_masks);
            d["u_gt"] = from_field(p.u_gt);
            d["roi"] = from_mask(p.roi);
            return d;
        },
        py::arg("size") = 96, py::arg("r_inner") = PhantomSpec{}.r_inner, py::arg("r_outer") = PhantomSpec{}.r_outer,
        py::arg("contraction") = 0.05, py::arg("noise") = 0.0, py::arg("seed") = 0);

    m.def(
        "endpoint_error",
        [](const Doubles& u, const Doubles& u_gt, const Bytes& roi, SpacingArg s) {
            auto e = endpoint_error(to_field(u, s), to_field(u_gt, s), to_mask(roi, s));
            return py::make_tuple(e.mean_mm, e.max_mm);
        },
        py::arg("u"), py::arg("u_gt"), py::arg("roi"), py::arg("spacing") = SpacingArg{1.0, 1.0});

    m.def(
        "register",
        [](const Doubles& moving, const Doubles& fixed, std::optional<std::map<std::string, Bytes>> moving_masks,
           std::optional<std::map<std::string, Bytes>> fixed_masks, const std::string& reg, double lam,
           double gamma, double nu, double E, double lr, int iters, bool pyramid, SpacingArg s) {
            SolverConfig cfg;
            cfg.loss.regularizer = parse_regularizer(reg);
            cfg.loss.lambda = lam;
            cfg.loss.gamma = gamma;
            cfg.loss.material = {E, nu};
            cfg.adam.learning_rate = lr;
            cfg.max_iterations = iters;
            cfg.pyramid = pyramid;
            const auto mi = to_image(moving, s), fi = to_image(fixed, s);
            std::optional<MaskPair> masks;
            if (moving_masks.has_value() != fixed_masks.has_value())
                throw Error(ErrorKind::InvalidArgument, "moving_masks and fixed_masks go together");
            if (moving_masks) masks = MaskPair{to_masks(*moving_masks, mi.grid()), to_masks(*fixed_masks, fi.grid())};

            SolveResult r;
            {
                py::gil_scoped_release release;
                r = register_pair(mi, fi, masks, cfg);
            }
            py::list history;
            for (const auto& h : r.history) history.append(h.total);
            py::dict d;
            d["u"] = from_field(r.u_star);
            d["iterations"] = r.iterations;
            d["stop"] = std::string(to_string(r.stop));
            d["total"] = r.final.total;
            d["sim"] = r.final.sim;
            d["reg"] = r.final.reg;
            d["seg"] = r.final.seg;
            d["history"] = history;
            d["warnings"] = r.warnings;
            return d;
        },
        py::arg("moving"), py::arg("fixed"), py::arg("moving_masks") = py::none(),
        py::arg("fixed_masks") = py::none(), py::arg("reg") = "bim", py::arg("lam") = 0.05, py::arg("gamma") = 0.01,
        py::arg("nu") = 0.4, py::arg("E") = 1.0, py::arg("lr") = 0.1, py::arg("iters") = 500,
        py::arg("pyramid") = false, py::arg("spacing") = SpacingArg{1.0, 1.0});
}
