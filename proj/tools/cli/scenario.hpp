// scenario.hpp: JSON scenario schema: strict parsing, overrides, echo.

#pragma once

#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"
#include "mqed/mqed.hpp"

namespace mqed::cli {

using json = nlohmann::json;

struct SchemaError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct PermittivitySpec {
    std::string type{"constant"}; // constant | drude_lorentz | tensor
    cplx eps{1.0, 0.0};
    double eps_inf{1.0};
    std::vector<LorentzPole> poles;
    C33 tensor{C33::Identity()};

    PermittivityModel build() const {
        if (type == "constant") return ConstantScalar{eps};
        if (type == "drude_lorentz") return DrudeLorentz{eps_inf, poles};
        return ConstantTensor{tensor};
    }
};

struct GeometrySpec {
    std::string type;                   // bulk | pec_box
    std::string backend{"closed_form"}; // bulk: closed_form | sommerfeld
    double k_max_multiplier{30.0};
    PermittivitySpec permittivity;
    R3 dimensions{1.0, 1.0, 1.0};
    int n_max{1};
};

struct PointPair {
    R3 r{R3::Zero()};
    R3 r0{R3::Zero()};
};

struct TaskSpec {
    std::vector<PointPair> points;
    std::vector<double> frequencies;
    std::optional<double> omega;
    std::vector<double> deltas;
    std::vector<double> radii;
    std::vector<double> etas;
    double k_max{0.0};
    double surface_tol{1e-8};
    std::string path{"softened"};    // softened | analytic
    std::string route{"lna"};        // lna | nmqed
    std::string mode{"markov-limit"}; // markov-limit | finite-memory
    bool refine{false};
    std::string initial{"excited"};  // excited | ground
    std::optional<std::pair<double, double>> fit_window;
};

struct Scenario {
    std::string name{"scenario"};
    std::string units{"natural"}; // natural | si
    GeometrySpec geometry;
    std::optional<TwoLevelAtom> atom;
    QuadratureSpec quadrature;
    std::optional<std::pair<double, int>> time; // t_max, n_steps
    ThermalState thermal;
    TaskSpec task;

    Constants constants() const { return units == "si" ? Constants::si() : Constants::natural(); }
};

namespace detail {

inline void check_keys(const json& j, const std::string& where, std::initializer_list<const char*> allowed) {
    if (!j.is_object()) throw SchemaError("'" + where + "' must be an object");
    std::set<std::string> ok(allowed.begin(), allowed.end());
    for (auto it = j.begin(); it != j.end(); ++it)
        if (!ok.count(it.key())) throw SchemaError("unknown key '" + it.key() + "' in '" + where + "'");
}

inline double num(const json& j, const std::string& where) {
    if (!j.is_number()) throw SchemaError("'" + where + "' must be a number");
    return j.get<double>();
}

inline int integer(const json& j, const std::string& where) {
    if (!j.is_number_integer()) throw SchemaError("'" + where + "' must be an integer");
    return j.get<int>();
}

inline std::string str(const json& j, const std::string& where, std::initializer_list<const char*> choices) {
    if (!j.is_string()) throw SchemaError("'" + where + "' must be a string");
    const auto s = j.get<std::string>();
    for (const char* c : choices)
        if (s == c) return s;
    throw SchemaError("'" + where + "' has invalid value '" + s + "'");
}

inline R3 vec3(const json& j, const std::string& where) {
    if (!j.is_array() || j.size() != 3) throw SchemaError("'" + where + "' must be an array of 3 numbers");
    return {num(j[0], where), num(j[1], where), num(j[2], where)};
}

inline cplx complex_value(const json& j, const std::string& where) {
    if (j.is_number()) return j.get<double>();
    if (!j.is_array() || j.size() != 2) throw SchemaError("'" + where + "' must be a number or [re, im]");
    return {num(j[0], where), num(j[1], where)};
}

inline std::vector<double> num_list(const json& j, const std::string& where) {
    if (!j.is_array()) throw SchemaError("'" + where + "' must be an array");
    std::vector<double> out;
    for (const auto& v : j) out.push_back(num(v, where));
    return out;
}

inline PermittivitySpec parse_permittivity(const json& j) {
    check_keys(j, "permittivity", {"type", "eps", "eps_inf", "poles"});
    PermittivitySpec p;
    if (!j.contains("type")) throw SchemaError("missing 'permittivity.type'");
    p.type = str(j["type"], "permittivity.type", {"constant", "drude_lorentz", "tensor"});
    if (p.type == "constant") {
        if (j.contains("eps")) p.eps = complex_value(j["eps"], "permittivity.eps");
    } else if (p.type == "drude_lorentz") {
        if (j.contains("eps_inf")) p.eps_inf = num(j["eps_inf"], "permittivity.eps_inf");
        if (j.contains("poles")) {
            if (!j["poles"].is_array()) throw SchemaError("'permittivity.poles' must be an array");
            for (const auto& pole : j["poles"]) {
                check_keys(pole, "permittivity.poles[]", {"omega_p", "omega_0", "gamma"});
                for (const char* key : {"omega_p", "omega_0", "gamma"})
                    if (!pole.contains(key)) throw SchemaError(std::string("missing 'permittivity.poles[].") + key + "'");
                p.poles.push_back({num(pole["omega_p"], "omega_p"), num(pole["omega_0"], "omega_0"),
                                   num(pole["gamma"], "gamma")});
            }
        }
    } else {
        if (!j.contains("eps") || !j["eps"].is_array() || j["eps"].size() != 3)
            throw SchemaError("'permittivity.eps' must be a 3x3 array for type 'tensor'");
        for (int a = 0; a < 3; ++a) {
            if (!j["eps"][a].is_array() || j["eps"][a].size() != 3)
                throw SchemaError("'permittivity.eps' must be a 3x3 array for type 'tensor'");
            for (int b = 0; b < 3; ++b) p.tensor(a, b) = complex_value(j["eps"][a][b], "permittivity.eps");
        }
    }
    return p;
}

inline json complex_json(cplx z) { return json::array({z.real(), z.imag()}); }
inline json vec_json(const R3& v) { return json::array({v.x(), v.y(), v.z()}); }

} // namespace detail

inline Scenario parse_scenario(const json& j) {
    using namespace detail;
    check_keys(j, "scenario", {"name", "units", "geometry", "atom", "quadrature", "time", "thermal", "task"});
    Scenario s;
    if (j.contains("name")) {
        if (!j["name"].is_string()) throw SchemaError("'name' must be a string");
        s.name = j["name"].get<std::string>();
        if (s.name.empty() || s.name.find_first_of("/\\") != std::string::npos)
            throw SchemaError("'name' must be a nonempty file-name-safe string");
    }
    if (j.contains("units")) s.units = str(j["units"], "units", {"natural", "si"});

    if (!j.contains("geometry")) throw SchemaError("missing 'geometry'");
    const auto& g = j["geometry"];
    check_keys(g, "geometry", {"type", "backend", "k_max_multiplier", "permittivity", "dimensions", "n_max"});
    if (!g.contains("type")) throw SchemaError("missing 'geometry.type'");
    s.geometry.type = str(g["type"], "geometry.type", {"bulk", "pec_box"});
    if (g.contains("backend"))
        s.geometry.backend = str(g["backend"], "geometry.backend", {"closed_form", "sommerfeld"});
    if (g.contains("k_max_multiplier")) s.geometry.k_max_multiplier = num(g["k_max_multiplier"], "k_max_multiplier");
    if (g.contains("permittivity")) s.geometry.permittivity = parse_permittivity(g["permittivity"]);
    if (s.geometry.type == "pec_box") {
        if (!g.contains("dimensions")) throw SchemaError("missing 'geometry.dimensions' for pec_box");
        if (!g.contains("n_max")) throw SchemaError("missing 'geometry.n_max' for pec_box");
        s.geometry.dimensions = vec3(g["dimensions"], "geometry.dimensions");
        s.geometry.n_max = integer(g["n_max"], "geometry.n_max");
        if (g.contains("backend")) throw SchemaError("'geometry.backend' applies to bulk geometries only");
    } else if (g.contains("dimensions") || g.contains("n_max")) {
        throw SchemaError("'geometry.dimensions'/'n_max' apply to pec_box geometries only");
    }

    if (j.contains("atom")) {
        const auto& a = j["atom"];
        check_keys(a, "atom", {"position", "dipole", "omega0", "drive"});
        TwoLevelAtom atom;
        if (!a.contains("position")) throw SchemaError("missing 'atom.position'");
        if (!a.contains("dipole")) throw SchemaError("missing 'atom.dipole'");
        if (!a.contains("omega0")) throw SchemaError("missing 'atom.omega0'");
        atom.position = vec3(a["position"], "atom.position");
        atom.dipole = vec3(a["dipole"], "atom.dipole");
        atom.omega0 = num(a["omega0"], "atom.omega0");
        if (a.contains("drive")) {
            check_keys(a["drive"], "atom.drive", {"omega_L", "Omega"});
            if (!a["drive"].contains("omega_L") || !a["drive"].contains("Omega"))
                throw SchemaError("'atom.drive' needs 'omega_L' and 'Omega'");
            atom.drive = Drive{num(a["drive"]["omega_L"], "atom.drive.omega_L"),
                               num(a["drive"]["Omega"], "atom.drive.Omega")};
        }
        s.atom = atom;
    }

    if (j.contains("quadrature")) {
        const auto& q = j["quadrature"];
        check_keys(q, "quadrature", {"abs_tol", "rel_tol", "max_subdivisions", "omega_max", "pv_excision", "eta"});
        if (q.contains("abs_tol")) s.quadrature.abs_tol = num(q["abs_tol"], "quadrature.abs_tol");
        if (q.contains("rel_tol")) s.quadrature.rel_tol = num(q["rel_tol"], "quadrature.rel_tol");
        if (q.contains("max_subdivisions"))
            s.quadrature.max_subdivisions = integer(q["max_subdivisions"], "quadrature.max_subdivisions");
        if (q.contains("omega_max")) s.quadrature.omega_max = num(q["omega_max"], "quadrature.omega_max");
        if (q.contains("pv_excision")) s.quadrature.pv_excision = num(q["pv_excision"], "quadrature.pv_excision");
        if (q.contains("eta")) s.quadrature.eta = num(q["eta"], "quadrature.eta");
    }

    if (j.contains("time")) {
        const auto& t = j["time"];
        check_keys(t, "time", {"t_max", "n_steps"});
        if (!t.contains("t_max") || !t.contains("n_steps")) throw SchemaError("'time' needs 't_max' and 'n_steps'");
        s.time = std::make_pair(num(t["t_max"], "time.t_max"), integer(t["n_steps"], "time.n_steps"));
    }

    if (j.contains("thermal")) {
        check_keys(j["thermal"], "thermal", {"temperature"});
        if (j["thermal"].contains("temperature"))
            s.thermal.temperature = num(j["thermal"]["temperature"], "thermal.temperature");
    }

    if (j.contains("task")) {
        const auto& t = j["task"];
        check_keys(t, "task",
                   {"points", "frequencies", "omega", "deltas", "radii", "etas", "k_max", "surface_tol", "path",
                    "route", "mode", "refine", "initial", "fit_window"});
        if (t.contains("points")) {
            if (!t["points"].is_array()) throw SchemaError("'task.points' must be an array");
            for (const auto& p : t["points"]) {
                check_keys(p, "task.points[]", {"r", "r0"});
                if (!p.contains("r") || !p.contains("r0")) throw SchemaError("'task.points[]' needs 'r' and 'r0'");
                s.task.points.push_back({vec3(p["r"], "task.points[].r"), vec3(p["r0"], "task.points[].r0")});
            }
        }
        if (t.contains("frequencies")) s.task.frequencies = num_list(t["frequencies"], "task.frequencies");
        if (t.contains("omega")) s.task.omega = num(t["omega"], "task.omega");
        if (t.contains("deltas")) s.task.deltas = num_list(t["deltas"], "task.deltas");
        if (t.contains("radii")) s.task.radii = num_list(t["radii"], "task.radii");
        if (t.contains("etas")) s.task.etas = num_list(t["etas"], "task.etas");
        if (t.contains("k_max")) s.task.k_max = num(t["k_max"], "task.k_max");
        if (t.contains("surface_tol")) s.task.surface_tol = num(t["surface_tol"], "task.surface_tol");
        if (t.contains("path")) s.task.path = str(t["path"], "task.path", {"softened", "analytic"});
        if (t.contains("route")) s.task.route = str(t["route"], "task.route", {"lna", "nmqed"});
        if (t.contains("mode")) s.task.mode = str(t["mode"], "task.mode", {"markov-limit", "finite-memory"});
        if (t.contains("refine")) {
            if (!t["refine"].is_boolean()) throw SchemaError("'task.refine' must be a boolean");
            s.task.refine = t["refine"].get<bool>();
        }
        if (t.contains("initial")) s.task.initial = str(t["initial"], "task.initial", {"excited", "ground"});
        if (t.contains("fit_window")) {
            const auto w = num_list(t["fit_window"], "task.fit_window");
            if (w.size() != 2 || !(w[0] < w[1])) throw SchemaError("'task.fit_window' must be [t_lo, t_hi]");
            s.task.fit_window = std::make_pair(w[0], w[1]);
        }
    }
    return s;
}

// Normalized echo; parse_scenario(to_json(s)) reproduces s.
inline json to_json(const Scenario& s) {
    using namespace detail;
    json j;
    j["name"] = s.name;
    j["units"] = s.units;
    json g;
    g["type"] = s.geometry.type;
    g["k_max_multiplier"] = s.geometry.k_max_multiplier;
    json p;
    p["type"] = s.geometry.permittivity.type;
    if (p["type"] == "constant") {
        p["eps"] = complex_json(s.geometry.permittivity.eps);
    } else if (p["type"] == "drude_lorentz") {
        p["eps_inf"] = s.geometry.permittivity.eps_inf;
        p["poles"] = json::array();
        for (const auto& pole : s.geometry.permittivity.poles)
            p["poles"].push_back({{"omega_p", pole.omega_p}, {"omega_0", pole.omega_0}, {"gamma", pole.gamma}});
    } else {
        json rows = json::array();
        for (int a = 0; a < 3; ++a) {
            json row = json::array();
            for (int b = 0; b < 3; ++b) row.push_back(complex_json(s.geometry.permittivity.tensor(a, b)));
            rows.push_back(row);
        }
        p["eps"] = rows;
    }
    g["permittivity"] = p;
    if (s.geometry.type == "pec_box") {
        g["dimensions"] = vec_json(s.geometry.dimensions);
        g["n_max"] = s.geometry.n_max;
    } else {
        g["backend"] = s.geometry.backend;
    }
    j["geometry"] = g;
    if (s.atom) {
        json a{{"position", vec_json(s.atom->position)}, {"dipole", vec_json(s.atom->dipole)},
               {"omega0", s.atom->omega0}};
        if (s.atom->drive) a["drive"] = {{"omega_L", s.atom->drive->omega_L}, {"Omega", s.atom->drive->Omega}};
        j["atom"] = a;
    }
    j["quadrature"] = {{"abs_tol", s.quadrature.abs_tol},         {"rel_tol", s.quadrature.rel_tol},
                       {"max_subdivisions", s.quadrature.max_subdivisions}, {"omega_max", s.quadrature.omega_max},
                       {"pv_excision", s.quadrature.pv_excision}, {"eta", s.quadrature.eta}};
    if (s.time) j["time"] = {{"t_max", s.time->first}, {"n_steps", s.time->second}};
    j["thermal"] = {{"temperature", s.thermal.temperature}};
    json t;
    t["points"] = json::array();
    for (const auto& pp : s.task.points) t["points"].push_back({{"r", vec_json(pp.r)}, {"r0", vec_json(pp.r0)}});
    t["frequencies"] = s.task.frequencies;
    if (s.task.omega) t["omega"] = *s.task.omega;
    t["deltas"] = s.task.deltas;
    t["radii"] = s.task.radii;
    t["etas"] = s.task.etas;
    t["k_max"] = s.task.k_max;
    t["surface_tol"] = s.task.surface_tol;
    t["path"] = s.task.path;
    t["route"] = s.task.route;
    t["mode"] = s.task.mode;
    t["refine"] = s.task.refine;
    t["initial"] = s.task.initial;
    if (s.task.fit_window) t["fit_window"] = {s.task.fit_window->first, s.task.fit_window->second};
    j["task"] = t;
    return j;
}

// --set path.to.key=value: value is parsed as JSON when possible, else taken
// as a string. Intermediate objects are created as needed.
inline void apply_override(json& root, const std::string& assignment) {
    const auto eq = assignment.find('=');
    if (eq == std::string::npos || eq == 0) throw SchemaError("override '" + assignment + "' is not key=value");
    const std::string path = assignment.substr(0, eq);
    const std::string text = assignment.substr(eq + 1);
    json value = json::parse(text, nullptr, false);
    if (value.is_discarded()) value = text;
    json* node = &root;
    std::size_t start = 0;
    for (;;) {
        const auto dot = path.find('.', start);
        const std::string key = path.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
        if (key.empty()) throw SchemaError("override '" + assignment + "' has an empty key");
        if (!node->is_object()) throw SchemaError("override '" + assignment + "' descends into a non-object");
        if (dot == std::string::npos) {
            (*node)[key] = value;
            return;
        }
        node = &(*node)[key];
        if (node->is_null()) *node = json::object();
        start = dot + 1;
    }
}

} // namespace mqed::cli
