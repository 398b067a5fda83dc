#include "facruin/cli.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <ostream>
#include <sstream>
#include <thread>

#include "CLI11.hpp"
#include "json.hpp"

#include "facruin/compound.hpp"
#include "facruin/config_io.hpp"
#include "facruin/error.hpp"
#include "facruin/income_pdf.hpp"
#include "facruin/montecarlo.hpp"
#include "facruin/pipeline.hpp"
#include "facruin/ruin.hpp"

#ifndef FACRUIN_VERSION
#define FACRUIN_VERSION "dev"
#endif

namespace facruin::cli {

namespace {

using nlohmann::json;
namespace fs = std::filesystem;

const double kNaN = std::numeric_limits<double>::quiet_NaN();

ConfigError config_error(const std::string& path, const std::string& message) {
    return ConfigError(std::vector<FieldIssue>{{path, message}});
}

struct Common {
    std::optional<std::string> config;
    std::vector<std::string> sets;
    std::string out_dir = ".";
    int jobs = 1;
};

struct Extra {
    int interval = 1;
    std::string method = "auto";
    bool skip_mc = false;
    int points = 401;
    std::string what = "both";
    double es_rate = 0.05;
    double es_users = 100.0;
    double es_fee = 0.1;
    std::vector<int> es_intervals{1, 2, 5, 10, 20};
    std::string es_values = "0:0.2:0.01";
};

struct StageOutput {
    std::vector<Table> tables;
    json achieved = json::object();
    std::vector<std::string> warnings;
};

std::string utc_now() {
    const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

std::vector<double> parse_range(const std::string& text) {
    std::vector<double> out;
    if (text.find(':') != std::string::npos) {
        double start = 0, stop = 0, step = 0;
        char c1 = 0, c2 = 0;
        std::istringstream is(text);
        is.imbue(std::locale::classic());
        if (!(is >> start >> c1 >> stop >> c2 >> step) || c1 != ':' || c2 != ':' || !(step > 0.0) || stop < start) {
            throw config_error(text, "range must be start:stop:step with step > 0 and stop >= start");
        }
        const auto n = static_cast<std::int64_t>(std::floor((stop - start) / step + 1e-9)) + 1;
        if (n > 100000) throw config_error(text, "range has more than 100000 points");
        for (std::int64_t k = 0; k < n; ++k) out.push_back(start + static_cast<double>(k) * step);
        return out;
    }
    std::istringstream is(text);
    is.imbue(std::locale::classic());
    for (std::string item; std::getline(is, item, ',');) {
        std::istringstream one(item);
        one.imbue(std::locale::classic());
        double v = 0;
        if (!(one >> v) || !one.eof()) throw config_error(text, "cannot parse sweep value '" + item + "'");
        out.push_back(v);
    }
    if (out.empty()) throw config_error(text, "empty sweep");
    return out;
}

std::string override_for(const std::string& path, double value) {
    const json defaults = config_to_json(ScenarioConfig{});
    const json::json_pointer ptr("/" + [&] {
        std::string p = path;
        std::replace(p.begin(), p.end(), '.', '/');
        return p;
    }());
    const std::string number = json(value).dump();
    if (defaults.contains(ptr) && defaults.at(ptr).is_array()) return path + "=[" + number + "]";
    return path + "=" + number;
}

std::vector<int> intervals_for(const ScenarioConfig& cfg, int interval) {
    std::vector<int> out;
    if (interval > 0) {
        if (interval > cfg.financial.horizon) throw DomainError("interval exceeds the horizon");
        out.push_back(interval);
    } else {
        for (int i = 1; i <= cfg.financial.horizon; ++i) out.push_back(i);
    }
    return out;
}

Table moments_table(const ScenarioConfig& cfg, int interval) {
    Table t{"moments", {"interval"}, {}};
    for (int s = 1; s <= cfg.numerics.moment_order; ++s) t.header.push_back("m" + std::to_string(s));
    for (int i : intervals_for(cfg, interval)) {
        const MomentVector mv = revenue_moments(cfg, i);
        std::vector<double> row{static_cast<double>(i)};
        row.insert(row.end(), mv.raw.begin(), mv.raw.end());
        t.rows.push_back(std::move(row));
    }
    return t;
}

StageOutput stage_moments(const ScenarioConfig& cfg, const Extra& ex, int) {
    StageOutput out;
    out.tables.push_back(moments_table(cfg, ex.interval));
    return out;
}

StageOutput stage_income_pdf(const ScenarioConfig& cfg, const Extra& ex, int) {
    const auto& num = cfg.numerics;
    const int i = intervals_for(cfg, std::max(ex.interval, 1)).front();
    const auto [lo, hi] = revenue_support(cfg, i);
    const ExpandedDensity d = expand_income(revenue_moments(cfg, i), lo, hi, num.moment_order, num.jacobi_a, num.jacobi_b);
    StageOutput out;
    Table t{"income_pdf", {"v", "pdf", "cdf"}, {}};
    const int n = std::max(ex.points, 2);
    for (int k = 0; k < n; ++k) {
        const double v = lo + (hi - lo) * k / (n - 1);
        t.rows.push_back({v, eval_income_pdf(d, v), eval_income_cdf(d, v)});
    }
    out.tables.push_back(std::move(t));
    out.achieved["sanitized_mass"] = d.sanitized_mass;
    out.achieved["order"] = d.order;
    out.warnings = d.warnings;
    return out;
}

StageOutput stage_compound(const ScenarioConfig& cfg, const Extra& ex, int) {
    if (ex.method != "auto" && ex.method != "direct" && ex.method != "fft" && ex.method != "ls") {
        throw config_error("--method", "must be auto, direct, fft or ls");
    }
    const int i = intervals_for(cfg, std::max(ex.interval, 1)).front();
    const double delta = default_lattice_step(cfg);
    const IntervalStage stage = run_interval(cfg, i, delta);
    StageOutput out;
    out.achieved["lattice_step"] = delta;
    out.warnings = stage.density.warnings;
    LatticePMF pmf;
    if (ex.method == "ls") {
        LsOptions opts;
        opts.tail_eps = cfg.numerics.tail_eps;
        const LsResult ls = hurlimann_ls_solve(stage.step, cfg.financial.w_n, opts);
        out.achieved["ls_residual"] = ls.residual;
        out.achieved["ls_clipped_mass"] = ls.clipped_mass;
        pmf = ls.pmf;
    } else {
        CompoundResult res = stage.compound;
        if (ex.method != "auto") {
            CompoundOptions opts;
            opts.tail_eps = cfg.numerics.tail_eps;
            opts.method = ex.method == "fft" ? CompoundMethod::Fft : CompoundMethod::Direct;
            res = compound_geometric(stage.step, cfg.financial.w_n, opts);
        }
        out.achieved["tail_mass"] = res.tail_mass;
        out.achieved["mean_identity_error"] = res.mean_identity_error;
        out.achieved["terms"] = res.terms;
        out.achieved["used_fft"] = res.used_fft;
        pmf = res.pmf;
    }
    Table t{"compound", {"x", "pmf"}, {}};
    for (std::int64_t k = pmf.min_index; k <= pmf.max_index(); ++k) {
        t.rows.push_back({static_cast<double>(k) * pmf.step, pmf.at(k)});
    }
    out.tables.push_back(std::move(t));
    return out;
}

StageOutput stage_ruin(const ScenarioConfig& cfg, const Extra& ex, int jobs) {
    const PipelineResult res = run_ruin_pipeline(cfg);
    StageOutput out;
    out.warnings = res.warnings;
    out.achieved["lattice_step"] = res.lattice_step;
    out.achieved["grid_step"] = res.ruin.grid_step;
    out.achieved["grid_points"] = res.ruin.grid_points;
    out.achieved["interp_error_bound"] = res.ruin.interp_error_bound;
    json per = json::array();
    for (const auto& st : res.intervals) {
        per.push_back({{"interval", st.interval},
                       {"sanitized_mass", st.density.sanitized_mass},
                       {"compound_tail_mass", st.compound.tail_mass},
                       {"mean_identity_error", st.compound.mean_identity_error}});
    }
    out.achieved["intervals"] = per;

    std::optional<SurplusEstimate> mc;
    if (!ex.skip_mc) mc = simulate_surplus_paths(cfg, SimulationPlan::from_config(cfg, jobs), cfg.numerics.u_values);
    Table t{"ruin", {"l", "u", "psi_numerical", "psi_montecarlo", "ci_low", "ci_high"}, {}};
    for (std::size_t l = 0; l < res.ruin.psi.size(); ++l) {
        for (std::size_t k = 0; k < res.ruin.u_values.size(); ++k) {
            const Proportion p = mc ? mc->psi[l][k] : Proportion{kNaN, kNaN, kNaN};
            t.rows.push_back({static_cast<double>(l + 1), res.ruin.u_values[k], res.ruin.psi[l][k], p.estimate, p.low,
                              p.high});
        }
    }
    out.tables.push_back(std::move(t));
    return out;
}

Table expected_surplus_table(const Extra& ex) {
    Table t{"expected_surplus", {"n", "e_v", "u_bound"}, {}};
    for (int n : ex.es_intervals) {
        for (double ev : parse_range(ex.es_values)) {
            t.rows.push_back({static_cast<double>(n), ev, initial_capital_bound(ex.es_rate, n, ex.es_users, ev, ex.es_fee)});
        }
    }
    return t;
}

StageOutput stage_expected_surplus(const ScenarioConfig&, const Extra& ex, int) {
    StageOutput out;
    out.tables.push_back(expected_surplus_table(ex));
    return out;
}

StageOutput stage_simulate(const ScenarioConfig& cfg, const Extra& ex, int jobs) {
    if (ex.what != "both" && ex.what != "moments" && ex.what != "ruin") {
        throw config_error("--what", "must be moments, ruin or both");
    }
    const SimulationPlan plan = SimulationPlan::from_config(cfg, jobs);
    StageOutput out;
    out.achieved["mc_users"] = plan.n_users;
    out.achieved["mc_paths"] = plan.n_paths;
    if (ex.what != "ruin") {
        const int order = cfg.numerics.moment_order;
        Table t{"simulate_moments", {"interval"}, {}};
        for (int s = 1; s <= order; ++s) t.header.push_back("m" + std::to_string(s));
        for (int s = 1; s <= order; ++s) t.header.push_back("se" + std::to_string(s));
        for (int i : intervals_for(cfg, ex.interval)) {
            const MomentEstimate est = estimate_moments(cfg, plan, i, order);
            std::vector<double> row{static_cast<double>(i)};
            row.insert(row.end(), est.moments.raw.begin(), est.moments.raw.end());
            row.insert(row.end(), est.std_error.begin(), est.std_error.end());
            t.rows.push_back(std::move(row));
        }
        out.tables.push_back(std::move(t));
    }
    if (ex.what != "moments") {
        const SurplusEstimate est = simulate_surplus_paths(cfg, plan, cfg.numerics.u_values);
        Table t{"simulate_ruin", {"l", "u", "psi", "ci_low", "ci_high"}, {}};
        for (std::size_t l = 0; l < est.psi.size(); ++l) {
            for (std::size_t k = 0; k < est.u_values.size(); ++k) {
                const Proportion& p = est.psi[l][k];
                t.rows.push_back({static_cast<double>(l + 1), est.u_values[k], p.estimate, p.low, p.high});
            }
        }
        out.tables.push_back(std::move(t));
    }
    return out;
}

ScenarioConfig with(const ScenarioConfig& base, const std::function<void(ScenarioConfig&)>& edit) {
    ScenarioConfig c = base;
    edit(c);
    return validate(c);
}

StageOutput stage_reproduce(const ScenarioConfig& cfg, const Extra& ex, int jobs) {
    StageOutput out;
    const SimulationPlan plan = SimulationPlan::from_config(cfg, jobs);
    const auto revenue_setup = [](ScenarioConfig& c) {
        c.financial.c_min = 0.1;
        c.financial.c_max = 100.0;
        c.products.rate_gaps = {100.0};
        c.products.product_mix = {1.0};
    };

    Table t2{"table2", {"alpha", "beta", "ev_numerical", "ev_montecarlo", "ev_std_error"}, {}};
    for (double alpha : {3.0, 4.0}) {
        for (double beta : {0.01, 0.1, 1.0}) {
            const auto c = with(cfg, [&](ScenarioConfig& s) {
                revenue_setup(s);
                s.network.alpha = alpha;
                s.network.beta = beta;
            });
            const MomentEstimate mc = estimate_moments(c, plan, 1, 1);
            t2.rows.push_back({alpha, beta, revenue_moments(c, 1, 1).raw[0], mc.moments.raw[0], mc.std_error[0]});
        }
    }
    out.tables.push_back(std::move(t2));

    Table f3{"fig3", {"a_d", "alpha", "ev_numerical", "ev_montecarlo", "ev_std_error"}, {}};
    for (double a_d : {10.0, 100.0}) {
        for (double alpha : parse_range("2.5:5:0.25")) {
            const auto c = with(cfg, [&](ScenarioConfig& s) {
                revenue_setup(s);
                s.products.rate_gaps = {a_d};
                s.network.alpha = alpha;
            });
            std::vector<double> row{a_d, alpha, revenue_moments(c, 1, 1).raw[0], kNaN, kNaN};
            if (std::abs(alpha - 2.5) < 1e-9 || std::abs(alpha - 3.5) < 1e-9 || std::abs(alpha - 4.5) < 1e-9) {
                const MomentEstimate mc = estimate_moments(c, plan, 1, 1);
                row[3] = mc.moments.raw[0];
                row[4] = mc.std_error[0];
            }
            f3.rows.push_back(std::move(row));
        }
    }
    out.tables.push_back(std::move(f3));

    {
        const auto [lo, hi] = revenue_support(cfg, 1);
        const auto& num = cfg.numerics;
        const MomentVector mv = revenue_moments(cfg, 1, 8);
        const MomentVector mv4{1, {mv.raw.begin(), mv.raw.begin() + 4}};
        const ExpandedDensity d4 = expand_income(mv4, lo, hi, 4, num.jacobi_a, num.jacobi_b);
        const ExpandedDensity d8 = expand_income(mv, lo, hi, 8, num.jacobi_a, num.jacobi_b);
        auto samples = sample_revenues(cfg, plan, 1);
        std::sort(samples.begin(), samples.end());
        Table f4{"fig4", {"v", "cdf_d4", "cdf_d8", "cdf_montecarlo", "pdf_d4"}, {}};
        const int n = std::max(ex.points, 2);
        for (int k = 0; k < n; ++k) {
            const double v = lo + (hi - lo) * k / (n - 1);
            const double ecdf = static_cast<double>(std::upper_bound(samples.begin(), samples.end(), v) - samples.begin()) /
                                static_cast<double>(samples.size());
            f4.rows.push_back({v, eval_income_cdf(d4, v), eval_income_cdf(d8, v), ecdf, eval_income_pdf(d4, v)});
        }
        out.tables.push_back(std::move(f4));
        out.achieved["fig4_sanitized_mass_d4"] = d4.sanitized_mass;
        out.achieved["fig4_sanitized_mass_d8"] = d8.sanitized_mass;
        for (const auto& w : d4.warnings) out.warnings.push_back("fig4 d=4: " + w);
        for (const auto& w : d8.warnings) out.warnings.push_back("fig4 d=8: " + w);
    }

    {
        const PipelineResult res = run_ruin_pipeline(cfg);
        const SurplusEstimate mc = simulate_surplus_paths(cfg, plan, cfg.numerics.u_values);
        const std::size_t last = res.ruin.psi.size() - 1;
        Table t3{"table3", {"u", "psi_numerical", "psi_montecarlo", "ci_low", "ci_high"}, {}};
        for (std::size_t k = 0; k < res.ruin.u_values.size(); ++k) {
            const Proportion& p = mc.psi[last][k];
            t3.rows.push_back({res.ruin.u_values[k], res.ruin.psi[last][k], p.estimate, p.low, p.high});
        }
        out.tables.push_back(std::move(t3));
        out.achieved["table3_interp_error_bound"] = res.ruin.interp_error_bound;
        out.achieved["table3_lattice_step"] = res.lattice_step;
        for (const auto& w : res.warnings) out.warnings.push_back("table3: " + w);
    }

    Table f2 = expected_surplus_table(ex);
    f2.name = "fig2";
    out.tables.push_back(std::move(f2));
    return out;
}

using Stage = std::function<StageOutput(const ScenarioConfig&, const Extra&, int)>;

const std::map<std::string, Stage>& stages() {
    static const std::map<std::string, Stage> table{
        {"moments", stage_moments},   {"income-pdf", stage_income_pdf},
        {"compound", stage_compound}, {"ruin", stage_ruin},
        {"expected-surplus", stage_expected_surplus}, {"simulate", stage_simulate},
        {"reproduce-tables", stage_reproduce},
    };
    return table;
}

json manifest_base(const std::string& subcommand, const ScenarioConfig& cfg, const std::string& started) {
    return {{"tool", "facility_ruin"},
            {"code_version", FACRUIN_VERSION},
            {"subcommand", subcommand},
            {"config_hash", config_hash(cfg)},
            {"config", config_to_json(cfg)},
            {"seed", cfg.numerics.seed},
            {"started_utc", started},
            {"tolerances",
             {{"rel_tol", cfg.numerics.rel_tol},
              {"tail_eps", cfg.numerics.tail_eps},
              {"interp_tol", cfg.numerics.interp_tol}}}};
}

void write_tables(const fs::path& dir, const std::vector<Table>& tables, const std::string& hash, json& manifest) {
    for (const auto& t : tables) {
        const std::string file = t.name + ".csv";
        write_atomic(dir / file, format_csv(t, hash));
        manifest["outputs"].push_back(file);
    }
}

void finish_manifest(const fs::path& dir, json manifest) {
    manifest["finished_utc"] = utc_now();
    write_atomic(dir / "manifest.json", manifest.dump(2) + "\n");
}

int run_stage(const std::string& name, const Common& common, const Extra& ex, std::ostream& out) {
    const std::string started = utc_now();
    const ScenarioConfig cfg = load_config(common.config, common.sets);
    const StageOutput res = stages().at(name)(cfg, ex, common.jobs);
    const fs::path dir(common.out_dir);
    fs::create_directories(dir);
    json manifest = manifest_base(name, cfg, started);
    manifest["outputs"] = json::array();
    write_tables(dir, res.tables, config_hash(cfg), manifest);
    manifest["achieved"] = res.achieved;
    manifest["warnings"] = res.warnings;
    finish_manifest(dir, manifest);
    for (const auto& w : res.warnings) out << "warning: " << w << "\n";
    for (const auto& t : res.tables) out << (dir / (t.name + ".csv")).string() << " (" << t.rows.size() << " rows)\n";
    return kExitOk;
}

int run_sweep(const std::vector<std::string>& params, const std::string& target, const Common& common,
              const Extra& ex, std::ostream& out) {
    if (target == "sweep" || target == "validate" || target == "reproduce-tables" || !stages().count(target)) {
        throw config_error("sweep", "cannot sweep '" + target + "'");
    }
    if (params.empty()) throw config_error("--param", "at least one sweep axis is required");
    const std::string started = utc_now();
    std::vector<SweepAxis> axes;
    for (const auto& p : params) axes.push_back(parse_sweep_axis(p));
    std::vector<std::vector<double>> points{{}};
    for (const auto& axis : axes) {
        std::vector<std::vector<double>> next;
        for (const auto& pt : points) {
            for (double v : axis.values) {
                auto q = pt;
                q.push_back(v);
                next.push_back(std::move(q));
            }
        }
        points = std::move(next);
    }

    const ScenarioConfig base = load_config(common.config, common.sets);
    const fs::path dir(common.out_dir);
    fs::create_directories(dir / "sweep");
    std::vector<StageOutput> results(points.size());
    std::vector<std::string> hashes(points.size());
    std::vector<std::exception_ptr> failures(points.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t p; (p = next.fetch_add(1)) < points.size();) {
            try {
                std::vector<std::string> sets = common.sets;
                for (std::size_t a = 0; a < axes.size(); ++a) sets.push_back(override_for(axes[a].path, points[p][a]));
                const ScenarioConfig cfg = load_config(common.config, sets);
                hashes[p] = config_hash(cfg);
                results[p] = stages().at(target)(cfg, ex, 1);
                for (const auto& t : results[p].tables) {
                    char idx[16];
                    std::snprintf(idx, sizeof idx, "%04zu", p);
                    write_atomic(dir / "sweep" / (t.name + "_" + idx + ".csv"), format_csv(t, hashes[p]));
                }
            } catch (...) {
                failures[p] = std::current_exception();
            }
        }
    };
    std::vector<std::thread> pool;
    const int workers = std::clamp(common.jobs, 1, static_cast<int>(points.size()));
    for (int t = 0; t < workers; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
    for (const auto& f : failures) {
        if (f) std::rethrow_exception(f);
    }

    json manifest = manifest_base("sweep " + target, base, started);
    manifest["outputs"] = json::array();
    manifest["axes"] = json::array();
    for (const auto& a : axes) manifest["axes"].push_back({{"path", a.path}, {"values", a.values}});
    manifest["point_config_hashes"] = hashes;
    std::vector<Table> merged;
    for (std::size_t ti = 0; ti < results.front().tables.size(); ++ti) {
        Table m{"sweep_" + results.front().tables[ti].name, {}, {}};
        for (const auto& a : axes) m.header.push_back(a.path);
        const auto& h = results.front().tables[ti].header;
        m.header.insert(m.header.end(), h.begin(), h.end());
        for (std::size_t p = 0; p < points.size(); ++p) {
            for (const auto& row : results[p].tables[ti].rows) {
                auto full = points[p];
                full.insert(full.end(), row.begin(), row.end());
                m.rows.push_back(std::move(full));
            }
        }
        merged.push_back(std::move(m));
    }
    write_tables(dir, merged, config_hash(base), manifest);
    json warnings = json::array();
    for (std::size_t p = 0; p < points.size(); ++p) {
        for (const auto& w : results[p].warnings) warnings.push_back("point " + std::to_string(p) + ": " + w);
    }
    manifest["warnings"] = warnings;
    finish_manifest(dir, manifest);
    for (const auto& t : merged) out << (dir / (t.name + ".csv")).string() << " (" << t.rows.size() << " rows)\n";
    return kExitOk;
}

void add_common(CLI::App* app, Common& c) {
    app->add_option("--config", c.config, "Scenario JSON (default: $" + std::string(kConfigEnvVar) + " or built-in)");
    app->add_option("--set", c.sets, "Override path.to.field=value (repeatable)")->allow_extra_args(false);
    app->add_option("--out", c.out_dir, "Output directory");
    app->add_option("--jobs", c.jobs, "Worker threads")->check(CLI::PositiveNumber);
}

void add_interval(CLI::App* app, Extra& ex) {
    app->add_option("--interval", ex.interval, "Compounding interval (0 = all)")->check(CLI::NonNegativeNumber);
}

void add_surplus(CLI::App* app, Extra& ex) {
    app->add_option("--rate", ex.es_rate, "Interest rate r");
    app->add_option("--users", ex.es_users, "E[N]");
    app->add_option("--fee", ex.es_fee, "E[C]");
    app->add_option("--n", ex.es_intervals, "Horizons n")->delimiter(',');
    app->add_option("--ev", ex.es_values, "E[V] range start:stop:step or list");
}

}  // namespace

std::string format_number(double x) {
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.12g", x);
    std::string s = buf;
    std::replace(s.begin(), s.end(), ',', '.');
    return s;
}

std::string format_csv(const Table& table, const std::string& hash) {
    std::string out = "# config_hash=" + hash + " manifest=manifest.json\n";
    for (std::size_t i = 0; i < table.header.size(); ++i) out += (i ? "," : "") + table.header[i];
    out += "\n";
    for (const auto& row : table.rows) {
        for (std::size_t i = 0; i < row.size(); ++i) {
            if (i) out += ",";
            out += format_number(row[i]);
        }
        out += "\n";
    }
    return out;
}

void write_atomic(const fs::path& path, const std::string& content) {
    fs::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
        if (!f) throw Error("cannot write " + tmp.string());
        f << content;
        if (!f.flush()) throw Error("cannot write " + tmp.string());
    }
    fs::rename(tmp, path);
}

SweepAxis parse_sweep_axis(const std::string& text) {
    const auto eq = text.find('=');
    if (eq == std::string::npos || eq == 0) throw config_error(text, "sweep axis must be name=start:stop:step");
    return {resolve_field_path(text.substr(0, eq)), parse_range(text.substr(eq + 1))};
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Ruin probability of a small-cell facility operator"};
    app.set_version_flag("--version", std::string(FACRUIN_VERSION));
    app.require_subcommand(1);
    Common common;
    Extra ex;

    auto* validate_cmd = app.add_subcommand("validate", "Check a scenario config");
    add_common(validate_cmd, common);

    auto* moments = app.add_subcommand("moments", "Revenue moments per interval");
    add_common(moments, common);
    add_interval(moments, ex);

    auto* income = app.add_subcommand("income-pdf", "Polynomial expansion of the income density");
    add_common(income, common);
    add_interval(income, ex);
    income->add_option("--points", ex.points, "Evaluation points")->check(CLI::PositiveNumber);

    auto* compound = app.add_subcommand("compound", "Per-interval net-profit distribution");
    add_common(compound, common);
    add_interval(compound, ex);
    compound->add_option("--method", ex.method, "auto, direct, fft or ls");

    auto* ruin = app.add_subcommand("ruin", "Ruin probabilities, numerical and simulated");
    add_common(ruin, common);
    ruin->add_flag("--skip-mc", ex.skip_mc, "Omit the Monte Carlo columns");

    auto* surplus = app.add_subcommand("expected-surplus", "Initial-capital bound from the expected surplus");
    add_common(surplus, common);
    add_surplus(surplus, ex);

    auto* simulate = app.add_subcommand("simulate", "Monte Carlo moments and ruin frequencies");
    add_common(simulate, common);
    add_interval(simulate, ex);
    simulate->add_option("--what", ex.what, "moments, ruin or both");

    std::vector<std::string> params;
    std::string target;
    auto* sweep = app.add_subcommand("sweep", "Run a subcommand over a parameter grid");
    add_common(sweep, common);
    add_interval(sweep, ex);
    add_surplus(sweep, ex);
    sweep->add_option("--param", params, "name=start:stop:step or name=v1,v2 (repeatable)")->required()->allow_extra_args(false);
    sweep->add_option("--points", ex.points, "Evaluation points");
    sweep->add_option("--method", ex.method, "Compound method");
    sweep->add_flag("--skip-mc", ex.skip_mc, "Omit Monte Carlo columns");
    sweep->add_option("--what", ex.what, "moments, ruin or both");
    sweep->add_option("target", target, "Subcommand to sweep")->required();

    auto* reproduce = app.add_subcommand("reproduce-tables", "Write the table and figure data files");
    add_common(reproduce, common);
    add_surplus(reproduce, ex);
    reproduce->add_option("--points", ex.points, "Points on the CDF grid");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e, out, err) == 0 ? kExitOk : kExitConfig;
    }

    try {
        CLI::App* chosen = app.get_subcommands().front();
        const std::string name = chosen->get_name();
        if (name == "validate") {
            const ScenarioConfig cfg = load_config(common.config, common.sets);
            out << "ok " << config_hash(cfg) << "\n";
            return kExitOk;
        }
        if (name == "sweep") return run_sweep(params, target, common, ex, out);
        return run_stage(name, common, ex, out);
    } catch (const ConfigError& e) {
        err << "config error:\n";
        for (const auto& issue : e.issues()) err << "  " << issue.path << ": " << issue.message << "\n";
        return kExitConfig;
    } catch (const AccuracyError& e) {
        err << "accuracy error: " << e.what() << "\n";
        if (!e.diagnostic().empty()) err << "  " << e.diagnostic() << "\n";
        return kExitAccuracy;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kExitFailure;
    }
}

}  // namespace facruin::cli
