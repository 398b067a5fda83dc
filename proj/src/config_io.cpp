#include "facruin/config_io.hpp"

#include <algorithm>
#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

#include "facruin/error.hpp"

namespace facruin {

using nlohmann::json;

namespace {

const char* kind_name(DurationKind k) {
    switch (k) {
        case DurationKind::Deterministic: return "deterministic";
        case DurationKind::TruncatedGeometric: return "truncated_geometric";
        case DurationKind::Pmf: return "pmf";
    }
    return "deterministic";
}

json spec_to_json(const DurationSpec& s) {
    json j{{"kind", kind_name(s.kind)}};
    switch (s.kind) {
        case DurationKind::Deterministic: j["slots"] = s.slots; break;
        case DurationKind::TruncatedGeometric:
            j["mean_slots"] = s.mean_slots;
            j["tau_max"] = s.tau_max;
            break;
        case DurationKind::Pmf: j["pmf"] = s.pmf; break;
    }
    return j;
}

json int_map(const std::map<int, double>& m) {
    json j = json::object();
    for (const auto& [k, v] : m) j[std::to_string(k)] = v;
    return j;
}

// Field reader that accumulates issues instead of stopping at the first one.
class Reader {
public:
    std::vector<FieldIssue> issues;

    void unknown_keys(const json& obj, const std::string& path, std::set<std::string> known) {
        for (auto it = obj.begin(); it != obj.end(); ++it) {
            if (!known.count(it.key())) issues.push_back({join(path, it.key()), "unknown field"});
        }
    }

    bool object(const json& j, const std::string& path) {
        if (j.is_object()) return true;
        issues.push_back({path, "must be an object"});
        return false;
    }

    void number(const json& obj, const std::string& path, const char* key, double& out) {
        if (!obj.contains(key)) return;
        const auto& v = obj.at(key);
        if (v.is_number()) out = v.get<double>();
        else issues.push_back({join(path, key), "must be a number"});
    }

    template <class Int>
    void integer(const json& obj, const std::string& path, const char* key, Int& out) {
        if (!obj.contains(key)) return;
        const auto& v = obj.at(key);
        if (v.is_number_integer() || v.is_number_unsigned()) {
            out = v.get<Int>();
        } else if (v.is_number_float() && v.get<double>() == static_cast<double>(static_cast<Int>(v.get<double>()))) {
            out = static_cast<Int>(v.get<double>());
        } else {
            issues.push_back({join(path, key), "must be an integer"});
        }
    }

    void boolean(const json& obj, const std::string& path, const char* key, bool& out) {
        if (!obj.contains(key)) return;
        const auto& v = obj.at(key);
        if (v.is_boolean()) out = v.get<bool>();
        else issues.push_back({join(path, key), "must be true or false"});
    }

    void vector(const json& obj, const std::string& path, const char* key, std::vector<double>& out) {
        if (!obj.contains(key)) return;
        const auto& v = obj.at(key);
        if (v.is_number()) {
            out = {v.get<double>()};
            return;
        }
        if (!v.is_array()) {
            issues.push_back({join(path, key), "must be an array of numbers"});
            return;
        }
        std::vector<double> tmp;
        for (const auto& e : v) {
            if (!e.is_number()) {
                issues.push_back({join(path, key), "must be an array of numbers"});
                return;
            }
            tmp.push_back(e.get<double>());
        }
        out = std::move(tmp);
    }

    void index_map(const json& obj, const std::string& path, const char* key, std::map<int, double>& out) {
        if (!obj.contains(key)) return;
        const auto& v = obj.at(key);
        const std::string p = join(path, key);
        if (!object(v, p)) return;
        std::map<int, double> tmp;
        for (auto it = v.begin(); it != v.end(); ++it) {
            int k = 0;
            if (!parse_index(it.key(), k)) {
                issues.push_back({join(p, it.key()), "key must be an integer index"});
                continue;
            }
            if (!it.value().is_number()) {
                issues.push_back({join(p, it.key()), "must be a number"});
                continue;
            }
            tmp[k] = it.value().get<double>();
        }
        out = std::move(tmp);
    }

    void spec(const json& obj, const std::string& path, DurationSpec& out, bool allow_nested) {
        std::set<std::string> known{"kind", "slots", "mean_slots", "tau_max", "pmf"};
        if (allow_nested) {
            known.insert("per_interval");
            known.insert("truncate_to_elapsed");
        }
        unknown_keys(obj, path, known);
        if (obj.contains("kind")) {
            const auto& k = obj.at("kind");
            const std::string s = k.is_string() ? k.get<std::string>() : "";
            if (s == "deterministic") out.kind = DurationKind::Deterministic;
            else if (s == "truncated_geometric") out.kind = DurationKind::TruncatedGeometric;
            else if (s == "pmf") out.kind = DurationKind::Pmf;
            else issues.push_back({join(path, "kind"), "must be deterministic, truncated_geometric or pmf"});
        }
        integer(obj, path, "slots", out.slots);
        number(obj, path, "mean_slots", out.mean_slots);
        integer(obj, path, "tau_max", out.tau_max);
        vector(obj, path, "pmf", out.pmf);
    }

    static bool parse_index(const std::string& s, int& out) {
        if (s.empty()) return false;
        std::size_t used = 0;
        try {
            out = std::stoi(s, &used);
        } catch (const std::exception&) {
            return false;
        }
        return used == s.size();
    }

    static std::string join(const std::string& a, const std::string& b) { return a.empty() ? b : a + "." + b; }
};

std::uint64_t fnv1a64(const std::string& s) {
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

}  // namespace

json config_to_json(const ScenarioConfig& c) {
    json j;
    const auto& n = c.network;
    j["network"] = {{"beta_per_m2", n.beta},     {"alpha", n.alpha},
                    {"p0_w", n.p0},              {"p_i_w", n.p_i},
                    {"sigma2_w", n.sigma2},      {"bandwidth_hz", n.bandwidth},
                    {"slot_duration_s", n.slot_duration}};
    const auto& f = c.financial;
    j["financial"] = {{"premium_rate_per_s", f.premium_rate},
                      {"c_min", f.c_min},
                      {"c_max", f.c_max},
                      {"operator_fees", int_map(f.operator_fees)},
                      {"operator_mix", int_map(f.operator_mix)},
                      {"interest_rate", f.interest_rate},
                      {"kappa_slots", f.kappa},
                      {"initial_capital", f.initial_capital},
                      {"w_n", f.w_n},
                      {"horizon_intervals", f.horizon}};
    j["products"] = {{"rate_gaps", c.products.rate_gaps}, {"product_mix", c.products.product_mix}};
    json d = spec_to_json(c.durations.base);
    d["truncate_to_elapsed"] = c.durations.truncate_to_elapsed;
    d["per_interval"] = json::object();
    for (const auto& [i, s] : c.durations.per_interval) d["per_interval"][std::to_string(i)] = spec_to_json(s);
    j["durations"] = d;
    const auto& m = c.numerics;
    j["numerics"] = {{"rel_tol", m.rel_tol},
                     {"moment_order", m.moment_order},
                     {"jacobi_a", m.jacobi_a},
                     {"jacobi_b", m.jacobi_b},
                     {"lattice_step", m.lattice_step},
                     {"u_grid_step", m.u_grid_step},
                     {"tail_eps", m.tail_eps},
                     {"interp_tol", m.interp_tol},
                     {"u_values", m.u_values},
                     {"seed", m.seed},
                     {"mc_users", m.mc_users},
                     {"mc_paths", m.mc_paths},
                     {"interferer_count", m.interferer_count},
                     {"frozen_interferers", m.frozen_interferers},
                     {"antithetic", m.antithetic}};
    return j;
}

ScenarioConfig config_from_json(const json& doc) {
    ScenarioConfig c;
    Reader r;
    if (!r.object(doc, "<root>")) throw ConfigError(r.issues);
    r.unknown_keys(doc, "", {"network", "financial", "products", "durations", "numerics"});

    if (doc.contains("network") && r.object(doc["network"], "network")) {
        const auto& n = doc["network"];
        r.unknown_keys(n, "network", {"beta_per_m2", "alpha", "p0_w", "p_i_w", "sigma2_w", "bandwidth_hz", "slot_duration_s"});
        r.number(n, "network", "beta_per_m2", c.network.beta);
        r.number(n, "network", "alpha", c.network.alpha);
        r.number(n, "network", "p0_w", c.network.p0);
        r.number(n, "network", "p_i_w", c.network.p_i);
        r.number(n, "network", "sigma2_w", c.network.sigma2);
        r.number(n, "network", "bandwidth_hz", c.network.bandwidth);
        r.number(n, "network", "slot_duration_s", c.network.slot_duration);
    }
    if (doc.contains("financial") && r.object(doc["financial"], "financial")) {
        const auto& f = doc["financial"];
        r.unknown_keys(f, "financial",
                       {"premium_rate_per_s", "c_min", "c_max", "operator_fees", "operator_mix", "interest_rate",
                        "kappa_slots", "initial_capital", "w_n", "horizon_intervals"});
        r.number(f, "financial", "premium_rate_per_s", c.financial.premium_rate);
        r.number(f, "financial", "c_min", c.financial.c_min);
        r.number(f, "financial", "c_max", c.financial.c_max);
        r.index_map(f, "financial", "operator_fees", c.financial.operator_fees);
        r.index_map(f, "financial", "operator_mix", c.financial.operator_mix);
        r.number(f, "financial", "interest_rate", c.financial.interest_rate);
        r.integer(f, "financial", "kappa_slots", c.financial.kappa);
        r.number(f, "financial", "initial_capital", c.financial.initial_capital);
        r.number(f, "financial", "w_n", c.financial.w_n);
        r.integer(f, "financial", "horizon_intervals", c.financial.horizon);
    }
    if (doc.contains("products") && r.object(doc["products"], "products")) {
        const auto& p = doc["products"];
        r.unknown_keys(p, "products", {"rate_gaps", "rates_bps", "product_mix"});
        if (p.contains("rate_gaps") && p.contains("rates_bps")) {
            r.issues.push_back({"products.rates_bps", "give either rate_gaps or rates_bps, not both"});
        }
        r.vector(p, "products", "rate_gaps", c.products.rate_gaps);
        if (p.contains("rates_bps")) {
            std::vector<double> rates;
            r.vector(p, "products", "rates_bps", rates);
            c.products.rate_gaps.clear();
            for (double rate : rates) {
                if (rate > 0.0 && c.network.bandwidth > 0.0) {
                    c.products.rate_gaps.push_back(rate_gap_from_rate(rate, c.network.bandwidth));
                } else {
                    r.issues.push_back({"products.rates_bps", "rates must be positive"});
                    break;
                }
            }
        }
        r.vector(p, "products", "product_mix", c.products.product_mix);
        if (!p.contains("product_mix") && c.products.rate_gaps.size() == 1) c.products.product_mix = {1.0};
    }
    if (doc.contains("durations") && r.object(doc["durations"], "durations")) {
        const auto& d = doc["durations"];
        r.spec(d, "durations", c.durations.base, true);
        r.boolean(d, "durations", "truncate_to_elapsed", c.durations.truncate_to_elapsed);
        if (d.contains("per_interval") && r.object(d["per_interval"], "durations.per_interval")) {
            const auto& pi = d["per_interval"];
            for (auto it = pi.begin(); it != pi.end(); ++it) {
                const std::string path = "durations.per_interval." + it.key();
                int idx = 0;
                if (!Reader::parse_index(it.key(), idx)) {
                    r.issues.push_back({path, "key must be an integer interval index"});
                    continue;
                }
                if (!r.object(it.value(), path)) continue;
                DurationSpec s;
                r.spec(it.value(), path, s, false);
                c.durations.per_interval[idx] = s;
            }
        }
    }
    if (doc.contains("numerics") && r.object(doc["numerics"], "numerics")) {
        const auto& m = doc["numerics"];
        r.unknown_keys(m, "numerics",
                       {"rel_tol", "moment_order", "jacobi_a", "jacobi_b", "lattice_step", "u_grid_step", "tail_eps",
                        "interp_tol", "u_values", "seed", "mc_users", "mc_paths", "interferer_count",
                        "frozen_interferers", "antithetic"});
        auto& n = c.numerics;
        r.number(m, "numerics", "rel_tol", n.rel_tol);
        r.integer(m, "numerics", "moment_order", n.moment_order);
        r.number(m, "numerics", "jacobi_a", n.jacobi_a);
        r.number(m, "numerics", "jacobi_b", n.jacobi_b);
        r.number(m, "numerics", "lattice_step", n.lattice_step);
        r.number(m, "numerics", "u_grid_step", n.u_grid_step);
        r.number(m, "numerics", "tail_eps", n.tail_eps);
        r.number(m, "numerics", "interp_tol", n.interp_tol);
        r.vector(m, "numerics", "u_values", n.u_values);
        r.integer(m, "numerics", "seed", n.seed);
        r.integer(m, "numerics", "mc_users", n.mc_users);
        r.integer(m, "numerics", "mc_paths", n.mc_paths);
        r.integer(m, "numerics", "interferer_count", n.interferer_count);
        r.boolean(m, "numerics", "frozen_interferers", n.frozen_interferers);
        r.boolean(m, "numerics", "antithetic", n.antithetic);
    }
    if (!r.issues.empty()) throw ConfigError(r.issues);
    return c;
}

std::string resolve_field_path(const std::string& name) {
    if (name.find('.') != std::string::npos) return name;
    const json defaults = config_to_json(ScenarioConfig{});
    std::string found;
    for (auto it = defaults.begin(); it != defaults.end(); ++it) {
        if (it.value().contains(name)) {
            if (!found.empty()) throw ConfigError({{name, "ambiguous field name; use the dotted path"}});
            found = it.key() + "." + name;
        }
    }
    if (name == "rates_bps") found = "products.rates_bps";
    // Unit suffixes may be dropped: beta resolves to network.beta_per_m2.
    if (found.empty()) {
        for (auto it = defaults.begin(); it != defaults.end(); ++it) {
            for (auto f = it.value().begin(); f != it.value().end(); ++f) {
                static const std::vector<std::string> units{"w", "hz", "s", "per_m2", "per_s", "slots", "intervals"};
                const std::string& key = f.key();
                if (key.size() <= name.size() + 1 || key.rfind(name + "_", 0) != 0) continue;
                if (std::find(units.begin(), units.end(), key.substr(name.size() + 1)) == units.end()) continue;
                if (!found.empty()) throw ConfigError({{name, "ambiguous field name; use the dotted path"}});
                found = it.key() + "." + f.key();
            }
        }
    }
    if (found.empty()) throw ConfigError({{name, "unknown field"}});
    return found;
}

void apply_override(json& doc, const std::string& assignment) {
    const auto eq = assignment.find('=');
    if (eq == std::string::npos || eq == 0) {
        throw ConfigError({{assignment, "override must have the form path.to.field=value"}});
    }
    const std::string path = resolve_field_path(assignment.substr(0, eq));
    const std::string text = assignment.substr(eq + 1);
    json value = json::parse(text, nullptr, false);
    if (value.is_discarded()) value = text;

    json* node = &doc;
    std::size_t start = 0;
    while (true) {
        const auto dot = path.find('.', start);
        const std::string key = path.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
        if (key.empty()) throw ConfigError({{path, "empty path component"}});
        if (!node->is_object()) throw ConfigError({{path, "cannot descend into a non-object"}});
        if (dot == std::string::npos) {
            (*node)[key] = value;
            return;
        }
        node = &(*node)[key];
        if (node->is_null()) *node = json::object();
        start = dot + 1;
    }
}

ScenarioConfig load_config(const std::optional<std::string>& path, const std::vector<std::string>& overrides) {
    std::optional<std::string> source = path;
    if (!source) {
        if (const char* env = std::getenv(kConfigEnvVar); env && *env) source = std::string(env);
    }
    json doc = json::object();
    if (source) {
        std::ifstream in(*source);
        if (!in) throw ConfigError({{*source, "cannot open config file"}});
        doc = json::parse(in, nullptr, false);
        if (doc.is_discarded()) throw ConfigError({{*source, "not valid JSON"}});
    }
    for (const auto& o : overrides) apply_override(doc, o);
    return validate(config_from_json(doc));
}

std::string config_hash(const ScenarioConfig& config) {
    std::ostringstream os;
    os << std::hex;
    os.width(16);
    os.fill('0');
    os << fnv1a64(config_to_json(config).dump());
    return os.str();
}

}  // namespace facruin
