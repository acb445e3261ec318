#include "bioreg/cli/commands.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <future>
#include <optional>

#include <CLI11.hpp>
#include <json.hpp>

#include "bioreg/cli/raster.hpp"
#include "bioreg/elasticity.hpp"
#include "bioreg/metrics.hpp"
#include "bioreg/phantom.hpp"
#include "bioreg/solver.hpp"

namespace bioreg::cli {

namespace {

using json = nlohmann::ordered_json;
using Clock = std::chrono::steady_clock;

// Options shared by `register` and `sweep`.
struct RegisterArgs {
    std::string moving, fixed;
    std::string moving_masks, fixed_masks;
    std::string gt_dvf, roi;
    std::string reg = "bim";
    double lambda = 0.05;
    double gamma = 0.01;
    double nu = 0.4;
    double E = 1.0;
    double lr = 0.1;
    int iters = 500;
    double tol = 1e-6;
    int window = 10;
    bool pyramid = false;
    bool per_pixel = false;
    bool timing = false;
    std::string report;
};

void add_register_options(CLI::App* app, RegisterArgs& a) {
    app->add_option("--moving", a.moving, "Moving (ED) image raster")->required();
    app->add_option("--fixed", a.fixed, "Fixed (ES) image raster")->required();
    app->add_option("--moving-masks", a.moving_masks, "Moving mask set raster");
    app->add_option("--fixed-masks", a.fixed_masks, "Fixed mask set raster");
    app->add_option("--gt-dvf", a.gt_dvf, "Ground-truth field for endpoint error");
    app->add_option("--roi", a.roi, "Single-channel mask restricting the endpoint error");
    app->add_option("--reg", a.reg, "Regularizer")->check(CLI::IsMember({"bim", "l2", "l2grad", "none"}))
        ->capture_default_str();
    app->add_option("--lambda", a.lambda, "Regularizer weight")->capture_default_str();
    app->add_option("--gamma", a.gamma, "Segmentation weight")->capture_default_str();
    app->add_option("--nu", a.nu, "Poisson ratio")->capture_default_str();
    app->add_option("--E", a.E, "Young's modulus scale")->capture_default_str();
    app->add_option("--lr", a.lr, "Adam learning rate, mm per step")->capture_default_str();
    app->add_option("--iters", a.iters, "Maximum iterations")->capture_default_str();
    app->add_option("--tol", a.tol, "Relative stop tolerance")->capture_default_str();
    app->add_option("--window", a.window, "Stop window in iterations")->capture_default_str();
    app->add_flag("--pyramid", a.pyramid, "Two-level coarse-to-fine schedule");
    app->add_flag("--bim-per-pixel", a.per_pixel, "Divide the BIM term by the pixel count");
    app->add_flag("--timing", a.timing, "Add wall-clock timings to the report");
    app->add_option("--report", a.report, "Output report (JSON)")->required();
}

SolverConfig solver_config(const RegisterArgs& a) {
    SolverConfig cfg;
    cfg.adam.learning_rate = a.lr;
    cfg.max_iterations = a.iters;
    cfg.tolerance = a.tol;
    cfg.window = a.window;
    cfg.pyramid = a.pyramid;
    cfg.loss.lambda = a.lambda;
    cfg.loss.gamma = a.gamma;
    cfg.loss.material = Material{a.E, a.nu};
    cfg.loss.regularizer = parse_regularizer(a.reg);
    cfg.loss.bim_per_pixel = a.per_pixel;
    return cfg;
}

json opt_path(const std::string& p) { return p.empty() ? json(nullptr) : json(p); }

json config_echo(const RegisterArgs& a, const SolverConfig& cfg) {
    json c;
    c["moving"] = a.moving;
    c["fixed"] = a.fixed;
    c["moving_masks"] = opt_path(a.moving_masks);
    c["fixed_masks"] = opt_path(a.fixed_masks);
    c["gt_dvf"] = opt_path(a.gt_dvf);
    c["roi"] = opt_path(a.roi);
    c["reg"] = std::string(to_string(cfg.loss.regularizer));
    c["lambda"] = cfg.loss.lambda;
    c["gamma"] = cfg.loss.gamma;
    c["nu"] = cfg.loss.material.nu;
    c["E"] = cfg.loss.material.E;
    c["bim_per_pixel"] = cfg.loss.bim_per_pixel;
    c["dice_eps"] = cfg.loss.dice_eps;
    c["lr"] = cfg.adam.learning_rate;
    c["beta1"] = cfg.adam.beta1;
    c["beta2"] = cfg.adam.beta2;
    c["adam_eps"] = cfg.adam.eps;
    c["iters"] = cfg.max_iterations;
    c["tolerance"] = cfg.tolerance;
    c["window"] = cfg.window;
    c["pyramid"] = cfg.pyramid;
    c["init"] = "zero";
    return c;
}

struct PairInputs {
    ScalarImage2D moving, fixed;
    std::optional<MaskPair> masks;
    std::optional<DisplacementField2D> gt;
    std::optional<BinaryMask> roi;
};

PairInputs load_pair(const RegisterArgs& a) {
    PairInputs p{image_from_raster(read_raster(a.moving)), image_from_raster(read_raster(a.fixed)), {}, {}, {}};
    require_same_grid(p.moving.grid(), p.fixed.grid(), "moving vs fixed image");
    if (a.moving_masks.empty() != a.fixed_masks.empty())
        fail(ErrorKind::InvalidArgument, "--moving-masks and --fixed-masks must be given together");
    if (!a.moving_masks.empty()) {
        p.masks = MaskPair{masks_from_raster(read_raster(a.moving_masks)),
                           masks_from_raster(read_raster(a.fixed_masks))};
        require_same_grid(p.masks->moving.grid(), p.moving.grid(), "moving masks");
        require_same_grid(p.masks->fixed.grid(), p.moving.grid(), "fixed masks");
        if (p.masks->moving.labels() != p.masks->fixed.labels())
            fail(ErrorKind::LabelMismatch, "moving and fixed mask sets carry different labels");
    }
    if (!a.roi.empty() && a.gt_dvf.empty()) fail(ErrorKind::InvalidArgument, "--roi needs --gt-dvf");
    if (!a.gt_dvf.empty()) {
        p.gt = field_from_raster(read_raster(a.gt_dvf));
        require_same_grid(p.gt->grid(), p.moving.grid(), "ground-truth field");
        if (!a.roi.empty()) {
            const SegMaskSet r = masks_from_raster(read_raster(a.roi));
            if (r.size() != 1) fail(ErrorKind::ParseError, "--roi must be a single-channel mask");
            require_same_grid(r.grid(), p.moving.grid(), "roi");
            p.roi = r[0].mask;
        } else {
            std::vector<std::uint8_t> all(p.moving.size(), 1);
            p.roi = BinaryMask(p.moving.grid(), std::move(all));
        }
    }
    return p;
}

json record_json(const LossRecord& r) {
    return json{{"total", r.total}, {"sim", r.sim}, {"reg", r.reg}, {"seg", r.seg}};
}

std::string mean_pm_std(double mean, double sd) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.4f ± %.4f", mean, sd);
    return buf;
}

json jacobian_json(const JacobianStats& s) {
    return json{{"mean", s.mean_abs_dev},
                {"std", s.std_abs_dev},
                {"formatted", mean_pm_std(s.mean_abs_dev, s.std_abs_dev)},
                {"min_det", s.min_det},
                {"folded", s.folded}};
}

json metrics_json(const DisplacementField2D& u, const std::optional<MaskPair>& masks) {
    json m;
    m["structures"] = json::array();
    JacobianStats jac;
    if (masks) {
        const MetricReport r = evaluate(u, masks->moving, masks->fixed);
        for (const auto& s : r.structures)
            m["structures"].push_back(json{{"label", s.label},
                                           {"dice", s.dice},
                                           {"jaccard", s.jaccard},
                                           {"hd_mm", s.hd_mm},
                                           {"asd_mm", s.asd_mm}});
        jac = r.jacobian;
    } else {
        jac = jacobian_stats(jacobian_det_map(u));
    }
    m["jac_metric"] = jacobian_json(jac);
    return m;
}

struct PairOutcome {
    SolveResult result;
    json summary;  // final, metrics, epe, warnings
    double seconds = 0.0;
};

PairOutcome solve_pair(const PairInputs& in, const SolverConfig& cfg) {
    const auto t0 = Clock::now();
    PairOutcome o{register_pair(in.moving, in.fixed, in.masks, cfg), {}, 0.0};
    o.seconds = std::chrono::duration<double>(Clock::now() - t0).count();
    const SolveResult& r = o.result;
    json& s = o.summary;
    s["iterations"] = r.iterations;
    s["stop"] = std::string(to_string(r.stop));
    s["warnings"] = r.warnings;
    s["final"] = record_json(r.final);
    s["mean_abs_u_mm"] = mean_displacement_magnitude(r.u_star);
    s["metrics"] = metrics_json(r.u_star, in.masks);
    if (in.gt) {
        const EndpointError e = endpoint_error(r.u_star, *in.gt, *in.roi);
        s["epe"] = json{{"mean_mm", e.mean_mm}, {"max_mm", e.max_mm}};
    } else {
        s["epe"] = nullptr;
    }
    return o;
}

void write_report(const std::string& path, const json& j) { write_file_atomic(path, j.dump(2) + "\n"); }

// Commands

int cmd_register(const RegisterArgs& a, const std::string& out_dvf) {
    const SolverConfig cfg = solver_config(a);
    validate_solver_config(cfg);
    const PairInputs in = load_pair(a);
    PairOutcome o = solve_pair(in, cfg);

    json pair = o.summary;
    json hist = json::array();
    for (const auto& h : o.result.history) hist.push_back(record_json(h));
    pair["history"] = std::move(hist);
    if (a.timing) pair["timing_s"] = o.seconds;

    json rep;
    rep["command"] = "register";
    rep["config"] = config_echo(a, cfg);
    rep["config"]["out_dvf"] = out_dvf;
    rep["pairs"] = json::array({pair});
    write_raster(out_dvf, to_raster(o.result.u_star));
    write_report(a.report, rep);
    return kExitOk;
}

int cmd_sweep(const RegisterArgs& a, const std::string& param, const std::vector<double>& values, int jobs) {
    if (values.empty()) fail(ErrorKind::InvalidArgument, "--values is empty");
    if (jobs < 1) fail(ErrorKind::InvalidArgument, "--jobs must be >= 1");
    const SolverConfig base = solver_config(a);
    validate_solver_config(base);
    std::vector<SolverConfig> cfgs;
    for (double v : values) {
        SolverConfig c = base;
        if (param == "lambda") c.loss.lambda = v;
        else if (param == "gamma") c.loss.gamma = v;
        else c.loss.material.nu = v;
        validate_solver_config(c);
        cfgs.push_back(c);
    }
    const PairInputs in = load_pair(a);

    // Runs are independent; results are stored by index so the report does
    // not depend on the schedule.
    const auto t0 = Clock::now();
    std::vector<std::optional<PairOutcome>> outcomes(cfgs.size());
    for (std::size_t start = 0; start < cfgs.size(); start += static_cast<std::size_t>(jobs)) {
        const std::size_t stop = std::min(cfgs.size(), start + static_cast<std::size_t>(jobs));
        std::vector<std::future<PairOutcome>> batch;
        for (std::size_t k = start; k < stop; ++k)
            batch.push_back(std::async(std::launch::async, [&in, &cfgs, k] { return solve_pair(in, cfgs[k]); }));
        for (std::size_t k = start; k < stop; ++k) outcomes[k] = batch[k - start].get();
    }

    json rows = json::array();
    for (std::size_t k = 0; k < cfgs.size(); ++k) {
        json row;
        row["value"] = values[k];
        for (auto& [key, v] : outcomes[k]->summary.items()) row[key] = v;
        if (a.timing) row["timing_s"] = outcomes[k]->seconds;
        rows.push_back(std::move(row));
    }
    json rep;
    rep["command"] = "sweep";
    rep["param"] = param;
    rep["values"] = values;
    rep["config"] = config_echo(a, base);
    rep["rows"] = std::move(rows);
    if (a.timing) rep["timing_s"] = std::chrono::duration<double>(Clock::now() - t0).count();
    write_report(a.report, rep);
    return kExitOk;
}

int cmd_metrics(const std::string& dvf, const std::string& mm, const std::string& fm, const std::string& report) {
    const DisplacementField2D u = field_from_raster(read_raster(dvf));
    MaskPair masks{masks_from_raster(read_raster(mm)), masks_from_raster(read_raster(fm))};
    require_same_grid(masks.moving.grid(), u.grid(), "moving masks");
    require_same_grid(masks.fixed.grid(), u.grid(), "fixed masks");
    json rep;
    rep["command"] = "metrics";
    rep["config"] = json{{"dvf", dvf}, {"moving_masks", mm}, {"fixed_masks", fm}};
    rep["mean_abs_u_mm"] = mean_displacement_magnitude(u);
    rep["metrics"] = metrics_json(u, masks);
    write_report(report, rep);
    return kExitOk;
}

int cmd_strain(const std::string& dvf, double nu, double E, const std::string& out_energy,
               const std::string& out_detj) {
    const Material m{E, nu};
    validate_material(m);
    const DisplacementField2D u = field_from_raster(read_raster(dvf));
    const ScalarImage2D w = strain_energy_density(strain_tensor(u), stiffness_matrix(m));
    write_raster(out_energy, to_raster(w));
    write_raster(out_detj, to_raster(jacobian_det_map(u)));
    return kExitOk;
}

int cmd_phantom(const PhantomSpec& spec, const std::string& prefix) {
    const PhantomPair p = make_pair(spec);
    write_raster(prefix + "moving.raster", to_raster(p.moving));
    write_raster(prefix + "fixed.raster", to_raster(p.fixed));
    write_raster(prefix + "moving_masks.raster", to_raster(p.moving_masks));
    write_raster(prefix + "fixed_masks.raster", to_raster(p.fixed_masks));
    write_raster(prefix + "u_gt.raster", to_raster(p.u_gt));
    write_raster(prefix + "roi.raster", to_raster(SegMaskSet(p.roi.grid(), {{"roi", p.roi}})));
    return kExitOk;
}

int exit_code_for(ErrorKind k) {
    switch (k) {
        case ErrorKind::InvalidArgument: return kExitUsage;
        case ErrorKind::NonFiniteLoss:
        case ErrorKind::DegenerateSample: return kExitNumeric;
        default: return kExitData;
    }
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Biomechanics-regularized 2D deformable registration"};
    app.name(args.empty() ? "bioreg" : args.front());
    app.require_subcommand(1);

    RegisterArgs reg_args;
    std::string out_dvf;
    auto* reg = app.add_subcommand("register", "Register one moving/fixed pair");
    add_register_options(reg, reg_args);
    reg->add_option("--out-dvf", out_dvf, "Output displacement field raster")->required();

    RegisterArgs sweep_args;
    std::string param;
    std::vector<double> values;
    int jobs = 1;
    auto* sweep = app.add_subcommand("sweep", "Register once per hyperparameter value");
    add_register_options(sweep, sweep_args);
    sweep->add_option("--param", param, "Swept parameter")
        ->required()
        ->check(CLI::IsMember({"lambda", "gamma", "nu"}));
    sweep->add_option("--values", values, "Comma-separated values")->required()->delimiter(',');
    sweep->add_option("--jobs", jobs, "Runs executed concurrently")->capture_default_str();

    std::string m_dvf, m_mm, m_fm, m_report;
    auto* met = app.add_subcommand("metrics", "Evaluate a field against mask sets");
    met->add_option("--dvf", m_dvf, "Displacement field raster")->required();
    met->add_option("--moving-masks", m_mm, "Moving mask set raster")->required();
    met->add_option("--fixed-masks", m_fm, "Fixed mask set raster")->required();
    met->add_option("--report", m_report, "Output report (JSON)")->required();

    std::string s_dvf, s_energy, s_detj;
    double s_nu = 0.4, s_E = 1.0;
    auto* str = app.add_subcommand("strain", "Write strain-energy and Jacobian-determinant maps");
    str->add_option("--dvf", s_dvf, "Displacement field raster")->required();
    str->add_option("--nu", s_nu, "Poisson ratio")->capture_default_str();
    str->add_option("--E", s_E, "Young's modulus scale")->capture_default_str();
    str->add_option("--out-energy", s_energy, "Output energy-density raster")->required();
    str->add_option("--out-detj", s_detj, "Output det(J) raster")->required();

    PhantomSpec spec;
    std::size_t size = spec.size.width;
    std::string prefix;
    auto* ph = app.add_subcommand("phantom", "Generate a contracting-annulus phantom pair");
    ph->add_option("--size", size, "Grid size N (N x N)")->capture_default_str();
    ph->add_option("--ri", spec.r_inner, "Inner radius, mm")->capture_default_str();
    ph->add_option("--ro", spec.r_outer, "Outer radius, mm")->capture_default_str();
    ph->add_option("--contraction", spec.contraction, "Contraction fraction")->capture_default_str();
    ph->add_option("--noise", spec.noise_sigma, "Gaussian noise sigma")->capture_default_str();
    ph->add_option("--seed", spec.seed, "Noise seed")->capture_default_str();
    ph->add_option("--out-prefix", prefix, "Prefix for the output files")->required();

    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        err << "UsageError: " << e.what() << '\n';
        return kExitUsage;
    }

    try {
        if (*reg) return cmd_register(reg_args, out_dvf);
        if (*sweep) return cmd_sweep(sweep_args, param, values, jobs);
        if (*met) return cmd_metrics(m_dvf, m_mm, m_fm, m_report);
        if (*str) return cmd_strain(s_dvf, s_nu, s_E, s_energy, s_detj);
        spec.size = {size, size};
        return cmd_phantom(spec, prefix);
    } catch (const Error& e) {
        err << to_string(e.kind()) << ": " << e.what() << '\n';
        return exit_code_for(e.kind());
    } catch (const std::exception& e) {
        err << "InternalError: " << e.what() << '\n';
        return kExitData;
    }
}

}  // namespace bioreg::cli
