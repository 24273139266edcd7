#ifndef DISCFLOW_CONFIG_HPP
#define DISCFLOW_CONFIG_HPP

#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "conformal.hpp"
#include "state.hpp"

namespace discflow {

struct config_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Run settings parsed from `section.key = value` text.
struct RunConfig {
    // map
    MapKind map_kind = MapKind::identity;
    double map_c = 0.0;          // quadratic / cubic coefficient
    Vec2 map_a{0.0, 0.0};        // moebius parameter
    // grid
    int nr = 64;
    int ntheta = 128;
    // dynamics
    Params params;
    // run
    std::string scenario = "equilibrium";
    unsigned seed = 1;
    std::string out_dir = ".";
    // probes
    std::vector<double> p_list{4.0, 8.0, 16.0, 32.0};
    int n_samples = 50;
    // free-form tolerance overrides (tol.<name> = value)
    std::map<std::string, double> tolerances;

    ConformalMap make_map() const {
        switch (map_kind) {
            case MapKind::identity: return ConformalMap::identity();
            case MapKind::moebius: return ConformalMap::moebius(Complex(map_a.x, map_a.y));
            case MapKind::quadratic: return ConformalMap::quadratic(map_c);
            case MapKind::cubic: return ConformalMap::cubic(map_c);
        }
        throw config_error("unknown map kind");
    }

    void validate() const {
        if (nr < 8 || ntheta < 8) throw config_error("grid dimensions must be at least 8");
        if (ntheta % 2 != 0) throw config_error("ntheta must be even");
        params.validate();
        if (map_kind == MapKind::quadratic && !(std::abs(map_c) < 0.5))
            throw config_error("quadratic coefficient must satisfy |c| < 1/2 (univalence)");
        if (map_kind == MapKind::cubic && !(std::abs(map_c) < 1.0 / 3.0))
            throw config_error("cubic coefficient must satisfy |c| < 1/3 (univalence)");
        if (map_kind == MapKind::moebius && !(map_a.norm() < 1.0))
            throw config_error("moebius parameter must satisfy |a| < 1");
        if (scenario != "equilibrium" && scenario != "bump" && scenario != "vortex" &&
            scenario != "manufactured")
            throw config_error("unknown scenario '" + scenario + "'");
        for (double p : p_list)
            if (!(p > 2.0)) throw config_error("probe p values must exceed 2");
        if (n_samples < 1) throw config_error("probe.n_samples must be positive");
    }

    // full effective-setting echo, itself parseable
    std::string echo() const {
        std::ostringstream os;
        os.precision(17);
        os << "scenario = " << scenario << "\n";
        os << "seed = " << seed << "\n";
        os << "map.kind = " << map_kind_name(map_kind) << "\n";
        if (map_kind == MapKind::moebius)
            os << "map.a_re = " << map_a.x << "\nmap.a_im = " << map_a.y << "\n";
        if (map_kind == MapKind::quadratic || map_kind == MapKind::cubic)
            os << "map.c = " << map_c << "\n";
        os << "grid.nr = " << nr << "\n";
        os << "grid.ntheta = " << ntheta << "\n";
        os << "dynamics.mu = " << params.mu << "\n";
        os << "dynamics.beta = " << params.beta << "\n";
        os << "dynamics.gamma = " << params.gamma << "\n";
        os << "dynamics.cfl = " << params.cfl << "\n";
        os << "dynamics.t_end = " << params.t_end << "\n";
        os << "probe.n_samples = " << n_samples << "\n";
        os << "probe.p_list =";
        for (size_t i = 0; i < p_list.size(); ++i) os << (i ? "," : " ") << p_list[i];
        os << "\n";
        for (const auto& [k, v] : tolerances) os << "tol." << k << " = " << v << "\n";
        return os.str();
    }
};

namespace detail {

inline std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

inline config_error at_line(int line, const std::string& what) {
    return config_error("config line " + std::to_string(line) + ": " + what);
}

inline double parse_double(const std::string& v, int line) {
    size_t pos = 0;
    double out;
    try {
        out = std::stod(v, &pos);
    } catch (const std::exception&) {
        throw at_line(line, "expected a number, got '" + v + "'");
    }
    if (pos != v.size()) throw at_line(line, "trailing characters after number in '" + v + "'");
    return out;
}

inline long parse_int(const std::string& v, int line) {
    size_t pos = 0;
    long out;
    try {
        out = std::stol(v, &pos);
    } catch (const std::exception&) {
        throw at_line(line, "expected an integer, got '" + v + "'");
    }
    if (pos != v.size()) throw at_line(line, "trailing characters after integer in '" + v + "'");
    return out;
}

} // namespace detail

inline RunConfig parse_config(const std::string& text) {
    RunConfig cfg;
    std::istringstream in(text);
    std::string raw;
    int line = 0;
    while (std::getline(in, raw)) {
        ++line;
        std::string s = raw;
        const auto hash = s.find('#');
        if (hash != std::string::npos) s = s.substr(0, hash);
        s = detail::trim(s);
        if (s.empty()) continue;
        const auto eq = s.find('=');
        if (eq == std::string::npos)
            throw detail::at_line(line, "malformed line (expected key = value)");
        const std::string key = detail::trim(s.substr(0, eq));
        const std::string val = detail::trim(s.substr(eq + 1));
        if (key.empty()) throw detail::at_line(line, "empty key");
        if (val.empty()) throw detail::at_line(line, "empty value for key '" + key + "'");

        if (key == "scenario") {
            cfg.scenario = val;
        } else if (key == "seed") {
            const long v = detail::parse_int(val, line);
            if (v < 0) throw detail::at_line(line, "seed must be nonnegative");
            cfg.seed = static_cast<unsigned>(v);
        } else if (key == "out") {
            cfg.out_dir = val;
        } else if (key == "map.kind") {
            if (val == "identity")
                cfg.map_kind = MapKind::identity;
            else if (val == "moebius")
                cfg.map_kind = MapKind::moebius;
            else if (val == "quadratic")
                cfg.map_kind = MapKind::quadratic;
            else if (val == "cubic")
                cfg.map_kind = MapKind::cubic;
            else
                throw detail::at_line(line, "unknown map kind '" + val + "'");
        } else if (key == "map.c") {
            cfg.map_c = detail::parse_double(val, line);
        } else if (key == "map.a_re") {
            cfg.map_a.x = detail::parse_double(val, line);
        } else if (key == "map.a_im") {
            cfg.map_a.y = detail::parse_double(val, line);
        } else if (key == "grid.nr") {
            cfg.nr = static_cast<int>(detail::parse_int(val, line));
        } else if (key == "grid.ntheta") {
            cfg.ntheta = static_cast<int>(detail::parse_int(val, line));
        } else if (key == "dynamics.mu") {
            cfg.params.mu = detail::parse_double(val, line);
        } else if (key == "dynamics.beta") {
            cfg.params.beta = detail::parse_double(val, line);
        } else if (key == "dynamics.gamma") {
            cfg.params.gamma = detail::parse_double(val, line);
        } else if (key == "dynamics.cfl") {
            cfg.params.cfl = detail::parse_double(val, line);
        } else if (key == "dynamics.t_end") {
            cfg.params.t_end = detail::parse_double(val, line);
        } else if (key == "probe.n_samples") {
            cfg.n_samples = static_cast<int>(detail::parse_int(val, line));
        } else if (key == "probe.p_list") {
            cfg.p_list.clear();
            std::istringstream ls(val);
            std::string item;
            while (std::getline(ls, item, ','))
                cfg.p_list.push_back(detail::parse_double(detail::trim(item), line));
            if (cfg.p_list.empty()) throw detail::at_line(line, "empty p_list");
        } else if (key.rfind("tol.", 0) == 0 && key.size() > 4) {
            cfg.tolerances[key.substr(4)] = detail::parse_double(val, line);
        } else {
            throw detail::at_line(line, "unknown key '" + key + "'");
        }
    }
    try {
        cfg.validate();
    } catch (const std::invalid_argument& e) {
        throw config_error(e.what());
    }
    return cfg;
}

} // namespace discflow

#endif
