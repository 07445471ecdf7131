#include "shiftwave/config.hpp"

#include <algorithm>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

namespace shiftwave {

namespace {

struct RawEntry {
    std::string value;
    int line = 0;
};

using RawSection = std::map<std::string, RawEntry>;
using RawConfig = std::map<std::string, RawSection>;

const std::map<std::string, std::set<std::string>>& known_keys() {
    static const std::map<std::string, std::set<std::string>> k = {
        {"model", {"mode", "d1", "d2", "r1", "r2", "a", "b", "s"}},
        {"habitat", {"family", "alpha_minus", "gamma", "file", "C", "rho", "level"}},
        {"kernel.prey", {"family", "tau", "samples", "file"}},
        {"kernel.predator", {"family", "tau", "samples", "file"}},
        {"grid", {"min", "max", "h"}},
        {"sim", {"T", "dt", "probe_dt", "frames", "snapshot_times"}},
        {"scenario",
         {"id", "kind", "wave_type", "method", "tol", "maxiter", "steady_tol", "wave_T",
          "tail_tol", "edge_fraction", "slack_tol", "s_list", "probes_file", "init_kind",
          "init_center", "init_width", "init_amp_u", "init_amp_v", "eps_ext", "eps_sat",
          "eps_coex", "band_eps", "kappa_margin", "v_min"}},
        {"accept", {"tol_scale"}},
    };
    return k;
}

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

[[noreturn]] void fail(const std::string& source, int line, const std::string& msg) {
    std::ostringstream os;
    os << source << ":" << line << ": " << msg;
    throw ConfigError(os.str());
}

RawConfig parse_raw(const std::string& text, const std::string& source) {
    RawConfig raw;
    std::istringstream in(text);
    std::string line;
    std::string section;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']') fail(source, lineno, "unterminated section header");
            section = trim(line.substr(1, line.size() - 2));
            if (!known_keys().count(section)) fail(source, lineno, "unknown section [" + section + "]");
            raw[section];
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) fail(source, lineno, "expected key = value");
        if (section.empty()) fail(source, lineno, "key outside any [section]");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty()) fail(source, lineno, "empty key");
        if (!known_keys().at(section).count(key)) {
            fail(source, lineno, "unknown key '" + key + "' in section [" + section + "]");
        }
        auto& sec = raw[section];
        auto it = sec.find(key);
        if (it != sec.end()) {
            std::ostringstream os;
            os << "duplicate key '" << key << "' in section [" << section << "]: first at line "
               << it->second.line << ", again at line " << lineno;
            fail(source, lineno, os.str());
        }
        sec[key] = RawEntry{value, lineno};
    }
    return raw;
}

double parse_double(const std::string& source, const RawEntry& e, const std::string& what) {
    const char* begin = e.value.c_str();
    char* end = nullptr;
    const double v = std::strtod(begin, &end);
    if (end == begin || *end != '\0') {
        fail(source, e.line, "cannot parse numeric value for " + what + ": '" + e.value + "'");
    }
    return v;
}

int parse_int(const std::string& source, const RawEntry& e, const std::string& what) {
    const double v = parse_double(source, e, what);
    const int i = static_cast<int>(v);
    if (static_cast<double>(i) != v) fail(source, e.line, what + " must be an integer");
    return i;
}

std::vector<double> parse_list(const std::string& source, const RawEntry& e,
                               const std::string& what) {
    std::vector<double> out;
    std::string item;
    std::istringstream is(e.value);
    while (std::getline(is, item, ',')) {
        item = trim(item);
        if (item.empty()) continue;
        const char* begin = item.c_str();
        char* end = nullptr;
        const double v = std::strtod(begin, &end);
        if (end == begin || *end != '\0') {
            fail(source, e.line, "cannot parse list entry for " + what + ": '" + item + "'");
        }
        out.push_back(v);
    }
    return out;
}

std::string resolve_path(const std::string& source, const std::string& rel) {
    namespace fs = std::filesystem;
    fs::path p(rel);
    if (p.is_absolute()) return rel;
    const fs::path base = fs::path(source).parent_path();
    return (base / p).string();
}

Kernel parse_kernel(const std::string& source, const RawSection& sec, const std::string& name) {
    std::string family = "raised-cosine";
    double tau = 1.0;
    int samples = 201;
    std::string file;
    for (const auto& [key, e] : sec) {
        if (key == "family") family = e.value;
        else if (key == "tau") tau = parse_double(source, e, name + ".tau");
        else if (key == "samples") samples = parse_int(source, e, name + ".samples");
        else if (key == "file") file = resolve_path(source, e.value);
    }
    if (family == "raised-cosine") return Kernel::raised_cosine(tau, samples);
    if (family == "uniform") return Kernel::uniform(tau, samples);
    if (family == "table") {
        if (file.empty()) throw ConfigError(name + ": family=table requires file=");
        if (!std::filesystem::exists(file)) throw ConfigError(name + ": missing table file " + file);
        return Kernel::from_file(file);
    }
    throw ConfigError(name + ": unknown kernel family '" + family + "'");
}

}  // namespace

std::string config_hash_of(const std::map<std::string, std::string>& canonical) {
    std::uint64_t h = 1469598103934665603ull;
    auto feed = [&](const std::string& s) {
        for (unsigned char c : s) {
            h ^= c;
            h *= 1099511628211ull;
        }
    };
    for (const auto& [k, v] : canonical) {
        feed(k);
        feed("=");
        feed(v);
        feed("\n");
    }
    std::ostringstream os;
    os << std::hex;
    os.width(16);
    os.fill('0');
    os << h;
    return os.str();
}

ScenarioConfig parse_config(const std::string& text, const std::string& source_name,
                            const std::vector<std::string>& overrides) {
    RawConfig raw = parse_raw(text, source_name);

    // apply overrides: section.key=value (longest known section prefix wins)
    for (const std::string& ov : overrides) {
        const auto eq = ov.find('=');
        if (eq == std::string::npos) throw ConfigError("override must be section.key=value: " + ov);
        const std::string path = trim(ov.substr(0, eq));
        const std::string value = trim(ov.substr(eq + 1));
        std::string section, key;
        for (const auto& [sec, keys] : known_keys()) {
            if (path.size() > sec.size() + 1 && path.compare(0, sec.size(), sec) == 0 &&
                path[sec.size()] == '.') {
                const std::string cand = path.substr(sec.size() + 1);
                if (keys.count(cand)) {
                    section = sec;
                    key = cand;
                }
            }
        }
        if (section.empty()) throw ConfigError("override names no known section.key: " + ov);
        raw[section][key] = RawEntry{value, 0};
    }

    ScenarioConfig cfg;
    cfg.source = source_name;

    std::map<std::string, std::string> canonical;
    for (const auto& [sec, entries] : raw) {
        for (const auto& [key, e] : entries) canonical[sec + "." + key] = e.value;
    }
    cfg.config_hash = config_hash_of(canonical);

    const std::string src = source_name;

    if (raw.count("model")) {
        for (const auto& [key, e] : raw["model"]) {
            if (key == "mode") {
                if (e.value == "nonlocal") cfg.model.mode = DispersalMode::Nonlocal;
                else if (e.value == "local") cfg.model.mode = DispersalMode::Local;
                else fail(src, e.line, "mode must be 'nonlocal' or 'local'");
            } else if (key == "d1") cfg.model.d1 = parse_double(src, e, "d1");
            else if (key == "d2") cfg.model.d2 = parse_double(src, e, "d2");
            else if (key == "r1") cfg.model.r1 = parse_double(src, e, "r1");
            else if (key == "r2") cfg.model.r2 = parse_double(src, e, "r2");
            else if (key == "a") cfg.model.a = parse_double(src, e, "a");
            else if (key == "b") cfg.model.b = parse_double(src, e, "b");
            else if (key == "s") cfg.model.s = parse_double(src, e, "s");
        }
    }
    if (!(cfg.model.s > 0.0)) {
        throw ConfigError(src + ": climate speed must be positive (model.s = " +
                          std::to_string(cfg.model.s) + ")");
    }

    if (raw.count("habitat")) {
        const RawSection& sec = raw["habitat"];
        std::string family = sec.count("family") ? sec.at("family").value : "tanh";
        if (family == "tanh") {
            double am = -1.0, gamma = 1.0;
            if (sec.count("alpha_minus")) am = parse_double(src, sec.at("alpha_minus"), "alpha_minus");
            if (sec.count("gamma")) gamma = parse_double(src, sec.at("gamma"), "gamma");
            cfg.habitat = HabitatProfile::tanh_profile(am, gamma);
        } else if (family == "table") {
            if (!sec.count("file")) throw ConfigError(src + ": habitat family=table requires file=");
            const std::string file = resolve_path(src, sec.at("file").value);
            if (!std::filesystem::exists(file)) throw ConfigError(src + ": missing habitat table " + file);
            cfg.habitat = HabitatProfile::from_file(file);
        } else if (family == "constant") {
            double level = 1.0;
            if (sec.count("level")) level = parse_double(src, sec.at("level"), "level");
            cfg.habitat = HabitatProfile::constant(level);
        } else {
            throw ConfigError(src + ": unknown habitat family '" + family + "'");
        }
        if (sec.count("C") != sec.count("rho")) {
            throw ConfigError(src + ": habitat C and rho must be given together");
        }
        if (sec.count("C")) {
            cfg.habitat.set_tail_constants(parse_double(src, sec.at("C"), "C"),
                                           parse_double(src, sec.at("rho"), "rho"));
        }
    }

    if (raw.count("kernel.prey")) cfg.kernel_prey = parse_kernel(src, raw["kernel.prey"], "kernel.prey");
    if (raw.count("kernel.predator")) {
        cfg.kernel_predator = parse_kernel(src, raw["kernel.predator"], "kernel.predator");
    }
    if (cfg.model.mode == DispersalMode::Nonlocal) {
        if (!cfg.kernel_prey) cfg.kernel_prey = Kernel::raised_cosine(1.0, 201);
        if (!cfg.kernel_predator) cfg.kernel_predator = Kernel::raised_cosine(1.0, 201);
    }

    double gmin = -200.0, gmax = 200.0, gh = 0.1;
    if (raw.count("grid")) {
        const RawSection& sec = raw["grid"];
        if (sec.count("min")) gmin = parse_double(src, sec.at("min"), "grid.min");
        if (sec.count("max")) gmax = parse_double(src, sec.at("max"), "grid.max");
        if (sec.count("h")) gh = parse_double(src, sec.at("h"), "grid.h");
    }
    cfg.grid = Grid1D::from_range(gmin, gmax, gh);

    if (raw.count("sim")) {
        const RawSection& sec = raw["sim"];
        if (sec.count("T")) cfg.T = parse_double(src, sec.at("T"), "sim.T");
        if (sec.count("dt")) cfg.dt = parse_double(src, sec.at("dt"), "sim.dt");
        if (sec.count("probe_dt")) cfg.probe_dt = parse_double(src, sec.at("probe_dt"), "probe_dt");
        if (sec.count("frames")) cfg.frames = parse_list(src, sec.at("frames"), "frames");
        if (sec.count("snapshot_times")) {
            cfg.snapshot_times = parse_list(src, sec.at("snapshot_times"), "snapshot_times");
        }
    }

    if (raw.count("scenario")) {
        const RawSection& sec = raw["scenario"];
        auto num = [&](const char* key, double& slot) {
            if (sec.count(key)) slot = parse_double(src, sec.at(key), key);
        };
        if (sec.count("id")) cfg.scenario_id = sec.at("id").value;
        if (sec.count("kind")) cfg.kind = sec.at("kind").value;
        if (sec.count("wave_type")) cfg.wave_type = sec.at("wave_type").value;
        if (sec.count("method")) cfg.method = sec.at("method").value;
        num("tol", cfg.tol);
        if (sec.count("maxiter")) cfg.maxiter = parse_int(src, sec.at("maxiter"), "maxiter");
        num("steady_tol", cfg.steady_tol);
        num("wave_T", cfg.wave_T);
        num("tail_tol", cfg.tail_tol);
        num("edge_fraction", cfg.edge_fraction);
        num("slack_tol", cfg.slack_tol);
        if (sec.count("s_list")) cfg.s_list = parse_list(src, sec.at("s_list"), "s_list");
        if (sec.count("probes_file")) cfg.probes_file = resolve_path(src, sec.at("probes_file").value);
        if (sec.count("init_kind")) {
            const std::string& k = sec.at("init_kind").value;
            if (k == "bump") cfg.init_kind = InitKind::Bump;
            else if (k == "pair-of-bumps") cfg.init_kind = InitKind::PairOfBumps;
            else if (k == "front-like") cfg.init_kind = InitKind::FrontLike;
            else fail(src, sec.at("init_kind").line, "unknown init_kind '" + k + "'");
        }
        num("init_center", cfg.init_center);
        num("init_width", cfg.init_width);
        num("init_amp_u", cfg.init_amp_u);
        num("init_amp_v", cfg.init_amp_v);
        num("eps_ext", cfg.thresholds.eps_ext);
        num("eps_sat", cfg.thresholds.eps_sat);
        num("eps_coex", cfg.thresholds.eps_coex);
        num("band_eps", cfg.thresholds.band_eps);
        num("kappa_margin", cfg.thresholds.kappa_margin);
        num("v_min", cfg.thresholds.v_min);
    }

    if (raw.count("accept")) {
        const RawSection& sec = raw["accept"];
        if (sec.count("tol_scale")) {
            cfg.accept_tol_scale = parse_double(src, sec.at("tol_scale"), "tol_scale");
            if (!(cfg.accept_tol_scale > 0.0)) throw ConfigError(src + ": tol_scale must be positive");
        }
    }

    if (cfg.scenario_id.empty()) {
        cfg.scenario_id = std::filesystem::path(source_name).stem().string();
        if (cfg.scenario_id.empty()) cfg.scenario_id = "scenario";
    }

    // semantic checks that do not need the full model build
    cfg.model.validate();
    cfg.habitat.validate();
    return cfg;
}

ScenarioConfig load_config(const std::string& path, const std::vector<std::string>& overrides) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config(buf.str(), path, overrides);
}

ValidatedModel ScenarioConfig::validated() const {
    return validate_model(model, kernel_prey, kernel_predator, habitat);
}

}  // namespace shiftwave
