// run.hpp: subcommand runners. Each runner computes everything in memory and
// returns the files to write, so a failing run leaves no partial output.

#pragma once

#include <chrono>
#include <cstdio>
#include <functional>
#include <map>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "cli/scenario.hpp"

namespace mqed::cli {

struct OutputFile {
    std::string name;
    std::string content;
};

struct RunOutput {
    json result = json::object();
    std::vector<OutputFile> files;
    std::vector<std::string> warnings;
};

inline const std::vector<std::string>& subcommands() {
    static const std::vector<std::string> names{"modes",         "green", "check-p1", "check-magic", "check-surface",
                                                "check-appendix", "ww",    "master"};
    return names;
}

namespace detail {

inline std::string fmt(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

class Csv {
public:
    explicit Csv(std::initializer_list<std::string> header) {
        bool first = true;
        for (const auto& h : header) {
            out_ << (first ? "" : ",") << h;
            first = false;
        }
        out_ << '\n';
    }
    explicit Csv(const std::vector<std::string>& header) {
        for (std::size_t i = 0; i < header.size(); ++i) out_ << (i ? "," : "") << header[i];
        out_ << '\n';
    }
    void row(const std::vector<double>& v) {
        for (std::size_t i = 0; i < v.size(); ++i) out_ << (i ? "," : "") << fmt(v[i]);
        out_ << '\n';
    }
    std::string str() const { return out_.str(); }

private:
    std::ostringstream out_;
};

inline json tensor_json(const C33& M) {
    json rows = json::array();
    for (int a = 0; a < 3; ++a) {
        json row = json::array();
        for (int b = 0; b < 3; ++b) row.push_back(complex_json(M(a, b)));
        rows.push_back(row);
    }
    return rows;
}

inline json report_json(const IdentityReport& rep) {
    json j{{"lhs", tensor_json(rep.lhs)},
           {"rhs", tensor_json(rep.rhs)},
           {"abs_residual", rep.abs_residual},
           {"rel_residual", rep.rel_residual},
           {"metadata", rep.metadata}};
    json parts = json::object();
    for (const auto& [name, M] : rep.parts) parts[name] = tensor_json(M);
    j["parts"] = parts;
    return j;
}

inline json point_json(const PointPair& p) { return {{"r", vec_json(p.r)}, {"r0", vec_json(p.r0)}}; }

inline void require(bool ok, const std::string& what) {
    if (!ok) throw SchemaError(what);
}

inline std::shared_ptr<const ModeSet> build_modes(const Scenario& s) {
    require(s.geometry.type == "pec_box", "this task requires geometry.type = 'pec_box'");
    CavityGeometry g;
    g.Lx = s.geometry.dimensions.x();
    g.Ly = s.geometry.dimensions.y();
    g.Lz = s.geometry.dimensions.z();
    g.background = s.geometry.permittivity.build();
    return std::make_shared<const ModeSet>(build_pec_box_modes(g, s.geometry.n_max, s.constants()));
}

inline GreenEvaluator build_green(const Scenario& s, std::shared_ptr<const ModeSet> modes = nullptr) {
    if (s.geometry.type == "pec_box") {
        if (!modes) modes = build_modes(s);
        return GreenEvaluator(CavityModeSum{modes, s.quadrature.eta}, s.constants());
    }
    const auto eps = s.geometry.permittivity.build();
    if (s.geometry.backend == "sommerfeld")
        return GreenEvaluator(BulkSommerfeld{eps, s.quadrature, s.geometry.k_max_multiplier}, s.constants());
    return GreenEvaluator(BulkClosedForm{eps}, s.constants());
}

inline const std::vector<PointPair>& points(const Scenario& s) {
    require(!s.task.points.empty(), "this task requires a nonempty 'task.points'");
    return s.task.points;
}

inline double omega(const Scenario& s) {
    require(s.task.omega.has_value(), "this task requires 'task.omega'");
    return *s.task.omega;
}

inline const TwoLevelAtom& atom(const Scenario& s) {
    require(s.atom.has_value(), "this task requires an 'atom' block");
    return *s.atom;
}

inline std::pair<double, int> time_axis(const Scenario& s) {
    require(s.time.has_value(), "this task requires a 'time' block");
    return *s.time;
}

// Vacuum rate as printed for free space, gamma^2 w0^3 / (pi eps0 hbar c^3).
inline double printed_vacuum_rate(const TwoLevelAtom& a, const Constants& k) {
    return a.dipole.squaredNorm() * std::pow(a.omega0, 3) / (pi * k.eps0 * k.hbar * std::pow(k.c, 3));
}

inline bool is_bulk_vacuum(const Scenario& s) {
    return s.geometry.type == "bulk" && s.geometry.permittivity.type == "constant" &&
           s.geometry.permittivity.eps == cplx(1.0, 0.0);
}

} // namespace detail

inline RunOutput run_modes(const Scenario& s) {
    using namespace detail;
    const auto modes = build_modes(s);
    Csv csv({"m", "n", "p", "branch", "omega"});
    for (const auto& e : modes->entries)
        csv.row({double(e.index.m), double(e.index.n), double(e.index.p), double(e.index.branch), e.omega});
    RunOutput out;
    out.files.push_back({s.name + "_modes.csv", csv.str()});
    out.result = {{"n_modes", modes->size()},
                  {"expected_n_modes", expected_mode_count(s.geometry.n_max)},
                  {"eps_b", modes->eps_b},
                  {"max_omega", modes->max_omega()},
                  {"distinct_omegas", modes->distinct_omegas().size()}};
    return out;
}

inline RunOutput run_green(const Scenario& s) {
    using namespace detail;
    const auto green = build_green(s);
    require(!s.task.frequencies.empty(), "green requires a nonempty 'task.frequencies'");
    std::vector<std::string> header{"x", "y", "z", "x0", "y0", "z0", "omega"};
    for (int a = 0; a < 3; ++a)
        for (int b = 0; b < 3; ++b) {
            const std::string ij = std::to_string(a) + std::to_string(b);
            header.push_back("re_g" + ij);
            header.push_back("im_g" + ij);
        }
    Csv csv(header);
    for (const auto& p : points(s))
        for (double w : s.task.frequencies) {
            const C33 G = green(p.r, p.r0, w);
            std::vector<double> row{p.r.x(), p.r.y(), p.r.z(), p.r0.x(), p.r0.y(), p.r0.z(), w};
            for (int a = 0; a < 3; ++a)
                for (int b = 0; b < 3; ++b) {
                    row.push_back(G(a, b).real());
                    row.push_back(G(a, b).imag());
                }
            csv.row(row);
        }
    RunOutput out;
    out.files.push_back({s.name + "_green.csv", csv.str()});
    out.result = {{"backend", green.name()},
                  {"n_points", s.task.points.size()},
                  {"n_frequencies", s.task.frequencies.size()}};
    return out;
}

inline RunOutput run_check_p1(const Scenario& s) {
    using namespace detail;
    const auto modes = build_modes(s);
    const auto path = s.task.path == "analytic" ? ConversionPath::AnalyticLimit : ConversionPath::Softened;
    std::vector<double> etas = s.task.etas;
    if (etas.empty() || path == ConversionPath::AnalyticLimit) etas = {s.quadrature.eta};
    RunOutput out;
    json reports = json::array();
    for (const auto& p : points(s))
        for (double eta : etas) {
            QuadratureSpec spec = s.quadrature;
            spec.eta = eta;
            const auto rep = check_conversion_p1(*modes, p.r, p.r0, spec, path, s.constants());
            reports.push_back({{"points", point_json(p)}, {"eta", eta}, {"report", report_json(rep)}});
        }
    out.result = {{"path", s.task.path}, {"n_modes", modes->size()}, {"checks", reports}};
    return out;
}

inline RunOutput run_check_magic(const Scenario& s) {
    using namespace detail;
    require(s.geometry.type == "bulk", "check-magic requires a bulk geometry");
    const double w = omega(s);
    std::vector<double> deltas = s.task.deltas;
    RunOutput out;
    json reports = json::array();
    auto one = [&](const Scenario& sc, const PointPair& p, std::optional<double> delta) {
        const auto green = build_green(sc);
        const auto rep = check_magic_formula(green, sc.geometry.permittivity.build(), p.r, p.r0, w, sc.quadrature);
        json j{{"points", point_json(p)}, {"report", report_json(rep)}};
        if (delta) j["delta"] = *delta;
        reports.push_back(j);
    };
    for (const auto& p : points(s)) {
        if (deltas.empty()) {
            one(s, p, std::nullopt);
            continue;
        }
        require(s.geometry.permittivity.type == "constant", "task.deltas requires a constant permittivity");
        for (double d : deltas) {
            Scenario sc = s;
            sc.geometry.permittivity.eps = cplx(s.geometry.permittivity.eps.real(), d);
            one(sc, p, d);
        }
    }
    out.result = {{"omega", w}, {"checks", reports}};
    return out;
}

inline RunOutput run_check_surface(const Scenario& s) {
    using namespace detail;
    require(s.geometry.type == "bulk", "check-surface requires a bulk geometry");
    require(!s.task.radii.empty(), "check-surface requires a nonempty 'task.radii'");
    const double w = omega(s);
    const auto green = build_green(s);
    RunOutput out;
    json reports = json::array();
    for (const auto& p : points(s))
        for (double R : s.task.radii) {
            const auto rep = check_surface_term(green, R, p.r, p.r0, w, s.quadrature, s.task.surface_tol);
            const double im_g = max_abs(im(green(p.r, p.r0, w)));
            const double surf = rep.parts.count("surface") ? max_abs(rep.parts.at("surface")) : 0.0;
            reports.push_back({{"points", point_json(p)},
                               {"R", R},
                               {"surface_over_im_g", surf / im_g},
                               {"report", report_json(rep)}});
        }
    out.result = {{"omega", w}, {"checks", reports}};
    return out;
}

inline RunOutput run_check_appendix(const Scenario& s) {
    using namespace detail;
    const double w = omega(s);
    RunOutput out;
    json reports = json::array();
    for (const auto& p : points(s)) {
        const auto rep = check_appendix_lossless_limit(p.r, p.r0, w, s.quadrature, s.task.k_max, s.constants());
        reports.push_back({{"points", point_json(p)}, {"report", report_json(rep)}});
    }
    out.result = {{"omega", w}, {"checks", reports}};
    return out;
}

inline RunOutput run_ww(const Scenario& s) {
    using namespace detail;
    const auto& a = atom(s);
    const auto [t_max, n_steps] = time_axis(s);
    const auto kc = s.constants();
    MemoryKernel kernel;
    if (s.task.route == "nmqed") {
        kernel = kernel_nmqed(*build_modes(s), a, kc);
    } else {
        kernel = kernel_lna(build_green(s), a, s.quadrature);
    }
    const auto rates = markov_rate_and_shift(kernel);
    auto res = solve_volterra(kernel, t_max, n_steps);

    RunOutput out;
    json summary{{"route", s.task.route},
                 {"provenance", to_string(kernel.provenance)},
                 {"Gamma", rates.Gamma},
                 {"shift", rates.shift},
                 {"shift_error", rates.shift_error},
                 {"t_max", t_max},
                 {"n_steps", n_steps}};
    std::optional<std::pair<double, double>> window = s.task.fit_window;
    if (!window && rates.Gamma > 0.0 && t_max >= 5.0 / rates.Gamma) window = {2.0 / rates.Gamma, 5.0 / rates.Gamma};
    if (window) {
        const auto fit = fit_markov(res, window->first, window->second);
        res.markov_fit = fit;
        summary["fit"] = {{"Gamma", fit.Gamma},
                          {"shift", fit.shift},
                          {"t_lo", fit.t_lo},
                          {"t_hi", fit.t_hi},
                          {"Gamma_ratio", rates.Gamma > 0.0 ? fit.Gamma / rates.Gamma : 0.0}};
    } else {
        out.warnings.push_back("no Markov fit: Gamma is zero or t_max < 5/Gamma; set task.fit_window to fit");
    }
    if (is_bulk_vacuum(s)) {
        const double printed = printed_vacuum_rate(a, kc);
        summary["vacuum_formula"] = {{"Gamma", printed}, {"ratio", rates.Gamma / printed}};
    }
    if (kernel.measure.has_density()) {
        const double wm = kernel.measure.omega_max;
        const double tail = kernel.measure.density_at(wm) * wm;
        summary["tail_estimate"] = tail;
        if (rates.Gamma > 0.0 && tail > 1e-3 * rates.Gamma)
            out.warnings.push_back("spectral tail at omega_max is not small; consider raising quadrature.omega_max");
    }

    Csv csv({"t", "re_c", "im_c", "P"});
    for (int i = 0; i < res.grid.size(); ++i) csv.row({res.grid[i], res.c[i].real(), res.c[i].imag(), res.P[i]});
    out.files.push_back({s.name + "_ww.csv", csv.str()});
    out.result = summary;
    return out;
}

inline RunOutput run_master(const Scenario& s) {
    using namespace detail;
    const auto& a = atom(s);
    const auto [t_max, n_steps] = time_axis(s);
    const auto sd = s.task.route == "nmqed" ? spectral_density_nmqed(*build_modes(s), a, s.thermal, s.constants())
                                            : spectral_density_lna(build_green(s), a, s.quadrature, s.thermal);
    MasterOptions opt;
    opt.mode = s.task.mode == "finite-memory" ? MemoryMode::FiniteMemory : MemoryMode::MarkovLimit;
    opt.refine = s.task.refine;
    const auto rho0 = s.task.initial == "ground" ? DensityMatrix2::ground() : DensityMatrix2::excited();
    const auto tr = evolve_master_equation(a, sd, rho0, t_max, n_steps, opt);
    const auto ss = markov_steady_state(a, sd);

    RunOutput out;
    out.warnings = tr.warnings;
    Csv csv({"t", "rho_ee", "re_rho_eg", "im_rho_eg"});
    for (int i = 0; i < tr.grid.size(); ++i)
        csv.row({tr.grid[i], tr.rho[i].rho_ee(), tr.rho[i].rho_eg().real(), tr.rho[i].rho_eg().imag()});
    out.files.push_back({s.name + "_master.csv", csv.str()});
    out.result = {{"route", s.task.route},
                  {"mode", to_string(tr.mode)},
                  {"gamma", tr.markov.gamma},
                  {"Delta_d", tr.markov.shift},
                  {"steady_state",
                   {{"rho_ee", ss.rho_ee()}, {"rho_gg", ss.rho_gg()}, {"rho_eg", complex_json(ss.rho_eg())}}},
                  {"final", {{"rho_ee", tr.rho.back().rho_ee()}, {"rho_eg", complex_json(tr.rho.back().rho_eg())}}},
                  {"diagnostics",
                   {{"max_trace_drift", tr.max_trace_drift},
                    {"max_hermiticity_error", tr.max_hermiticity_error},
                    {"min_eigenvalue", tr.min_eigenvalue},
                    {"min_eigenvalue_time", tr.min_eigenvalue_time},
                    {"n_steps", tr.n_steps},
                    {"refinements", tr.refinements},
                    {"refine_change", tr.refine_change}}}};
    return out;
}

inline RunOutput dispatch(const std::string& cmd, const Scenario& s) {
    static const std::map<std::string, std::function<RunOutput(const Scenario&)>> table{
        {"modes", run_modes},
        {"green", run_green},
        {"check-p1", run_check_p1},
        {"check-magic", run_check_magic},
        {"check-surface", run_check_surface},
        {"check-appendix", run_check_appendix},
        {"ww", run_ww},
        {"master", run_master}};
    const auto it = table.find(cmd);
    if (it == table.end()) throw SchemaError("unknown subcommand '" + cmd + "'");
    return it->second(s);
}

// Cheap static checks run before any numerics.
inline void validate_for(const std::string& cmd, const Scenario& s) {
    using detail::require;
    s.quadrature.validate();
    if (s.atom) s.atom->validate();
    if (s.time) require(s.time->first > 0.0 && s.time->second >= 1, "'time' needs t_max > 0 and n_steps >= 1");
    require(s.thermal.temperature >= 0.0, "'thermal.temperature' must be >= 0");
    if (s.geometry.type == "pec_box")
        require(s.geometry.n_max >= 1 && s.geometry.dimensions.minCoeff() > 0.0,
                "pec_box needs positive dimensions and n_max >= 1");
    if (cmd == "modes" || cmd == "check-p1") require(s.geometry.type == "pec_box", cmd + " requires a pec_box geometry");
    if (cmd == "green") require(!s.task.frequencies.empty() && !s.task.points.empty(), "green needs points and frequencies");
    if (cmd == "check-p1" || cmd == "check-magic" || cmd == "check-surface" || cmd == "check-appendix")
        require(!s.task.points.empty(), cmd + " requires a nonempty 'task.points'");
    if (cmd == "check-magic" || cmd == "check-surface" || cmd == "check-appendix")
        require(s.task.omega.has_value(), cmd + " requires 'task.omega'");
    if (cmd == "check-magic" || cmd == "check-surface") require(s.geometry.type == "bulk", cmd + " requires a bulk geometry");
    if (cmd == "check-surface") require(!s.task.radii.empty(), "check-surface requires a nonempty 'task.radii'");
    if (cmd == "ww" || cmd == "master") {
        require(s.atom.has_value(), cmd + " requires an 'atom' block");
        require(s.time.has_value(), cmd + " requires a 'time' block");
        if (s.task.route == "nmqed") require(s.geometry.type == "pec_box", "route 'nmqed' requires a pec_box geometry");
    }
}

} // namespace mqed::cli
