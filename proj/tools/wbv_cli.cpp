#include <chrono>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <functional>
#include <iostream>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "validation.hpp"
#include "wbv/analysis.hpp"
#include "wbv/hollow.hpp"
#include "wbv/io.hpp"
#include "wbv/oracles.hpp"
#include "wbv/solver.hpp"

namespace {

using wbv::io::json;
namespace fs = std::filesystem;

class UsageError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

template <class T>
json to_value(const T& v) {
    return json(v);
}
template <class T>
json to_value(const std::optional<T>& v) {
    return v ? json(*v) : json(nullptr);
}
template <class T>
void from_value(T& var, const json& j) {
    var = j.get<T>();
}
template <class T>
void from_value(std::optional<T>& var, const json& j) {
    if (j.is_null())
        var.reset();
    else
        var = j.get<T>();
}

// Options bound to variables, with a JSON config file filling whatever the command line left unset.
// The resolved config leaves out where files go, so identical runs write identical bytes.
class Options {
public:
    explicit Options(CLI::App* app) : app_(app) {}

    template <class T>
    CLI::Option* add(const std::string& flags, const std::string& key, T& var, const std::string& help) {
        CLI::Option* o = app_->add_option(flags, var, help);
        fields_.push_back({key, o, [&var](const json& j) { from_value(var, j); }, [&var] { return to_value(var); }});
        return o;
    }
    CLI::Option* flag(const std::string& flags, const std::string& key, bool& var, const std::string& help) {
        CLI::Option* o = app_->add_flag(flags, var, help);
        fields_.push_back({key, o, [&var](const json& j) { var = j.get<bool>(); }, [&var] { return json(var); }});
        return o;
    }

    void apply_config(const json& cfg) {
        if (!cfg.is_object()) throw UsageError("config file must hold a JSON object");
        for (const auto& [key, value] : cfg.items()) {
            if (key == "command") {
                if (value != app_->get_name()) throw UsageError("config is for command '" + value.dump() + "', not '" + app_->get_name() + "'");
                continue;
            }
            auto it = std::find_if(fields_.begin(), fields_.end(), [&](const Field& f) { return f.key == key; });
            if (it == fields_.end()) throw UsageError("unknown config key '" + key + "' for " + app_->get_name());
            if (it->opt->count() > 0) continue;  // flags win
            try {
                it->set(value);
            } catch (const json::exception&) {
                throw UsageError("config key '" + key + "' has the wrong type");
            }
            given_.insert(key);
        }
    }

    bool given(const std::string& key) const {
        auto it = std::find_if(fields_.begin(), fields_.end(), [&](const Field& f) { return f.key == key; });
        return given_.count(key) > 0 || (it != fields_.end() && it->opt->count() > 0);
    }

    json resolved() const {
        json j = json::object();
        j["command"] = app_->get_name();
        for (const auto& f : fields_)
            if (f.key != "config" && f.key != "no_meta" && f.key != "out") j[f.key] = f.get();
        return j;
    }

private:
    struct Field {
        std::string key;
        CLI::Option* opt;
        std::function<void(const json&)> set;
        std::function<json()> get;
    };
    CLI::App* app_;
    std::vector<Field> fields_;
    std::set<std::string> given_;
};

struct Common {
    std::string config;
    std::string out = ".";
    bool no_meta = false;
};

void add_common(Options& o, Common& c) {
    o.add("--config", "config", c.config, "JSON config file; command-line flags take precedence")->check(CLI::ExistingFile);
    o.add("--out", "out", c.out, "output directory");
    o.flag("--no-meta", "no_meta", c.no_meta, "omit the time-stamped metadata line");
}

struct WaveOpts {
    std::optional<double> delta;
    std::optional<double> froude;
    double lambda = 5.0;
    int M = 256;
};

void add_wave(Options& o, WaveOpts& w) {
    auto* d = o.add("--delta", "delta", w.delta, "gravity coefficient 1/F^2 (0 = zero gravity)");
    auto* f = o.add("--froude", "froude", w.froude, "Froude number F");
    d->excludes(f);
    o.add("--lambda", "lambda", w.lambda, "half-period in the conformal variable");
    o.add("-M,--modes", "M", w.M, "number of cosine modes (power of two, 16..4096)");
}

void check_modes(int M) {
    if (M < 16 || M > 4096 || (M & (M - 1)) != 0) throw UsageError("M must be a power of two between 16 and 4096");
}

wbv::WaveParams wave_params(const WaveOpts& w) {
    if (w.delta.has_value() == w.froude.has_value()) throw UsageError("give exactly one of --delta and --froude");
    double delta = 0.0;
    if (w.froude) {
        if (!(*w.froude > 0.0)) throw UsageError("--froude must be positive");
        delta = 1.0 / (*w.froude * *w.froude);
    } else {
        delta = *w.delta;
        if (!(delta >= 0.0) || !std::isfinite(delta)) throw UsageError("--delta must be a non-negative number");
    }
    if (!(w.lambda > 0.0) || !std::isfinite(w.lambda)) throw UsageError("--lambda must be positive");
    check_modes(w.M);
    return {delta, w.lambda, w.M};
}

std::optional<std::string> meta(const Common& c) {
    if (c.no_meta) return std::nullopt;
    const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    char buf[64];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
    return std::string("wbv_cli generated ") + buf;
}

json load_config(const Common& c) {
    if (c.config.empty()) return json::object();
    std::ifstream in(c.config);
    try {
        return json::parse(in);
    } catch (const json::exception& e) {
        throw UsageError(c.config + ": " + e.what());
    }
}

void report_failure(const Common& c, const std::string& kind, const std::string& message, json extra = json::object()) {
    json err = {{"schema_version", wbv::io::schema_version}, {"error", kind}, {"message", message}};
    for (auto& [k, v] : extra.items()) err[k] = v;
    std::cerr << err.dump() << '\n';
    std::error_code ec;
    fs::create_directories(c.out, ec);
    std::ofstream(fs::path(c.out) / "error.json") << err.dump(1) << '\n';
}

// ---- sweep ----

struct SweepOpts {
    std::optional<double> beta_target;
    int max_steps = 400;
    double ds0 = 0.01;
    double ds_max = 0.2;
    double decay_max = 1e-6;
    int milestone_every = 10;
    int points = 1025;
    bool streamlines = false;
};

void write_wave(const fs::path& stem, const wbv::PhysicalWave& w, const wbv::io::Header& h) {
    wbv::io::write_surface_csv(stem.string() + "_surface.csv", w, h);
    if (!w.streamlines.empty()) wbv::io::write_streamlines_csv(stem.string() + "_streamlines.csv", w.streamlines, h);
    wbv::io::write_json(stem.string() + ".json", wbv::io::physical_wave_json(w), h);
}

int run_sweep(const Common& c, const WaveOpts& wo, const SweepOpts& so, const json& config) {
    const wbv::WaveParams p = wave_params(wo);
    wbv::ContinuationSettings st;
    st.beta_target = so.beta_target;
    st.max_steps = so.max_steps;
    st.ds0 = so.ds0;
    st.ds_max = so.ds_max;
    st.decay_max = so.decay_max;
    const wbv::io::Header h{config, meta(c)};
    const fs::path out(c.out);

    wbv::CurveRecord rec;
    bool stalled = false;
    std::string stall_msg;
    try {
        rec = wbv::continue_curve(wbv::SolutionPoint::trivial(p), p, st);
    } catch (const wbv::CurveStalledError& e) {
        rec = e.partial();
        stalled = true;
        stall_msg = e.what();
    }
    wbv::io::write_curve(out / "curve.jsonl", rec, h);
    const auto rows = wbv::curve_summary(rec);
    wbv::io::write_summary_csv(out / "summary.csv", rows, h);
    wbv::io::write_json(out / "summary.json", wbv::io::summary_json(rows), h);

    std::optional<std::size_t> first_overhang;
    for (std::size_t i = 0; i < rows.size(); ++i)
        if (rows[i].overhang) {
            first_overhang = i;
            break;
        }
    std::set<std::size_t> milestones;
    if (so.milestone_every > 0)
        for (std::size_t i = 0; i < rec.points.size(); i += static_cast<std::size_t>(so.milestone_every)) milestones.insert(i);
    if (first_overhang) milestones.insert(*first_overhang);
    if (!rec.points.empty()) milestones.insert(rec.points.size() - 1);
    wbv::ReconstructOptions ro;
    ro.n_points = so.points;
    ro.streamlines = so.streamlines;
    for (std::size_t i : milestones) {
        char name[32];
        std::snprintf(name, sizeof name, "wave_%04zu", i);
        write_wave(out / "waves" / name, wbv::reconstruct(rec.points[i], p, ro), h);
    }

    json events = json::array();
    for (const auto& e : rec.events) events.push_back({{"index", e.index}, {"kind", e.kind}});
    json summary = {{"points", rec.points.size()},
                    {"stop_reason", stalled ? "stalled" : rec.stop_reason},
                    {"final_beta", rec.points.empty() ? 0.0 : rec.points.back().beta},
                    {"first_overhang_beta", first_overhang ? json(rows[*first_overhang].beta) : json(nullptr)},
                    {"events", events}};
    std::cout << summary.dump() << '\n';
    if (stalled) {
        report_failure(c, "curve_stalled", stall_msg, {{"points", rec.points.size()}});
        return 1;
    }
    return 0;
}

// ---- solve ----

int run_solve(const Common& c, const WaveOpts& wo, double beta, const json& config) {
    const wbv::WaveParams p = wave_params(wo);
    if (!(beta >= 0.0 && beta < 1.0)) throw UsageError("--beta must lie in [0, 1)");
    wbv::SolutionPoint last = wbv::SolutionPoint::trivial(p);
    // beta = 0 is the trivial point itself; continuing would leave it
    if (beta != 0.0) {
        wbv::ContinuationSettings st;
        st.beta_target = beta;
        const auto rec = wbv::continue_curve(last, p, st);
        last = rec.points.back();
        if (std::abs(last.beta - beta) > 1e-12) {
            report_failure(c, "target_not_reached", "curve stopped (" + rec.stop_reason + ") at beta = " + wbv::io::fmt(last.beta));
            return 1;
        }
    }
    wbv::io::write_point(fs::path(c.out) / "solution.json", last, p, {config, meta(c)});
    wbv::ResidualSystem sys(p);
    const auto d = wbv::diagnose(sys, last);
    std::cout << json{{"beta", last.beta}, {"kappa", last.kappa}, {"Q", last.Q}, {"gamma", d.gamma}, {"residual_norm", d.residual_norm}}.dump()
              << '\n';
    return 0;
}

// ---- validate ----

int run_validate(const Common& c, const std::vector<std::string>& only, const std::string& fault, const json& config) {
    const auto known = wbv::validation::groups();
    for (const auto& g : only)
        if (std::find(known.begin(), known.end(), g) == known.end()) throw UsageError("unknown check group '" + g + "'");
    if (!fault.empty()) {
        if (fault != "a-periodic-sign") throw UsageError("unknown fault '" + fault + "'");
        wbv::fault::a_periodic_sign = true;
    }
    const auto results = wbv::validation::run(only);
    json checks = json::array();
    int failed = 0;
    for (const auto& r : results) {
        std::printf("%s  %-13s %-58s measured %-12.4g tol %.3g%s\n", r.pass ? "PASS" : "FAIL", r.group.c_str(), r.name.c_str(),
                    r.measured, r.tolerance, r.error.empty() ? "" : ("  [" + r.error + "]").c_str());
        json j = {{"group", r.group}, {"name", r.name}, {"measured", r.measured}, {"tolerance", r.tolerance}, {"pass", r.pass}};
        if (!r.error.empty()) j["error"] = r.error;
        checks.push_back(j);
        failed += r.pass ? 0 : 1;
    }
    std::printf("%d checks, %d failed\n", static_cast<int>(results.size()), failed);
    wbv::io::write_json(fs::path(c.out) / "validation.json",
                        json{{"checks", checks}, {"passed", static_cast<int>(results.size()) - failed}, {"failed", failed}},
                        {config, meta(c)});
    return failed == 0 ? 0 : 1;
}

// ---- trace ----

int run_trace(const Common& c, const std::string& input, int seeds, int points, const json& config) {
    const auto s = wbv::io::read_point(input);
    wbv::ReconstructOptions ro;
    ro.n_points = points;
    ro.streamlines = true;
    ro.streamline.n_seeds = seeds;
    const auto w = wbv::reconstruct(s.point, s.params, ro);
    const wbv::io::Header h{config, meta(c)};
    const fs::path out(c.out);
    wbv::io::write_surface_csv(out / "surface.csv", w, h);
    wbv::io::write_streamlines_csv(out / "streamlines.csv", w.streamlines, h);
    wbv::io::write_json(out / "wave.json", wbv::io::physical_wave_json(w), h);
    for (const auto& n : w.notices) std::cerr << "notice: " << n << '\n';
    std::cout << json{{"streamlines", w.streamlines.size()}, {"notices", w.notices}}.dump() << '\n';
    return 0;
}

// ---- hollow ----

int run_hollow(const Common& c, const std::string& input, std::optional<double> exact_beta, const std::vector<double>& rhos,
               int nodes, const json& config) {
    if (input.empty() == !exact_beta.has_value()) throw UsageError("give exactly one of --input and --exact-beta");
    if (rhos.empty()) throw UsageError("--rho needs at least one radius");
    if (nodes < 3) throw UsageError("--nodes must be at least 3");
    std::optional<wbv::PointVortexBase> base;
    json base_info;
    if (exact_beta) {
        const wbv::ExactZeroGravityWave w(*exact_beta);
        const auto p = wbv::exact_params(w);
        base.emplace([w](wbv::Complex z, int k) { return w(z, k); }, p.kappa, *exact_beta, p.gamma);
        base_info = {{"kind", "exact"}, {"beta0", *exact_beta}, {"kappa0", p.kappa}, {"gamma0", p.gamma}};
    } else {
        const auto s = wbv::io::read_point(input);
        base.emplace(wbv::solution_base(s.point));
        base_info = {{"kind", "solution"}, {"beta0", s.point.beta}, {"kappa0", s.point.kappa}, {"gamma0", base->gamma0}};
    }
    json list = json::array();
    for (double rho : rhos) {
        if (rho == 0.0) throw UsageError("--rho values must be nonzero");
        list.push_back(wbv::io::hollow_json(wbv::hollow_vortex(*base, rho, nodes)));
    }
    wbv::io::write_json(fs::path(c.out) / "hollow.json", json{{"base", base_info}, {"approximations", list}}, {config, meta(c)});
    std::cout << json{{"approximations", list.size()}}.dump() << '\n';
    return 0;
}

// ---- asym ----

int run_asym(const Common& c, const WaveOpts& wo, const std::vector<double>& betas, const json& config) {
    if (betas.empty()) throw UsageError("--beta needs at least one value");
    WaveOpts w = wo;
    w.M = 16;  // unused here; keeps the shared validation happy
    const double delta = wave_params(w).delta;
    if (!(delta > 0.0)) throw UsageError("small-amplitude tables need finite F (delta > 0)");
    const double F2 = 1.0 / delta;
    const wbv::io::Header h{config, meta(c)};
    const fs::path path = fs::path(c.out) / "asym.csv";
    auto out = wbv::io::detail::open_out(path);
    wbv::io::detail::csv_header(out, h, {"beta", "F_sq", "kappa", "gamma", "b", "ddotw_eta1", "ddotw_eta3"});
    json rows = json::array();
    for (double beta : betas) {
        const auto p = wbv::small_amplitude_prediction(beta, F2);
        using wbv::io::fmt;
        out << fmt(beta) << ',' << fmt(F2) << ',' << fmt(p.kappa) << ',' << fmt(p.gamma) << ',' << fmt(p.b) << ',' << fmt(p.ddotw_eta1)
            << ',' << fmt(p.ddotw_eta3) << '\n';
        rows.push_back({{"beta", beta}, {"F_sq", F2}, {"kappa", p.kappa}, {"gamma", p.gamma}, {"b", p.b},
                        {"ddotw_eta1", p.ddotw_eta1}, {"ddotw_eta3", p.ddotw_eta3}});
    }
    wbv::io::detail::close_out(out, path);
    wbv::io::write_json(fs::path(c.out) / "asym.json", json{{"rows", rows}}, h);
    std::cout << json{{"rows", rows.size()}}.dump() << '\n';
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Solver suite for periodic and solitary water waves carrying a point vortex"};
    app.require_subcommand(1);

    auto* sweep = app.add_subcommand("sweep", "continue a wave family from the trivial solution");
    Common sweep_c;
    WaveOpts sweep_w;
    SweepOpts sweep_o;
    Options sweep_opt(sweep);
    add_common(sweep_opt, sweep_c);
    add_wave(sweep_opt, sweep_w);
    sweep_opt.add("--beta-target", "beta_target", sweep_o.beta_target, "stop on reaching this vortex altitude");
    sweep_opt.add("--max-steps", "max_steps", sweep_o.max_steps, "maximum continuation steps");
    sweep_opt.add("--ds0", "ds0", sweep_o.ds0, "initial arclength step");
    sweep_opt.add("--ds-max", "ds_max", sweep_o.ds_max, "largest arclength step");
    sweep_opt.add("--decay-max", "decay_max", sweep_o.decay_max, "spectral tail ratio that stops the sweep as under-resolved");
    sweep_opt.add("--milestone-every", "milestone_every", sweep_o.milestone_every, "write a physical wave every k steps (0: off)");
    sweep_opt.add("--points", "points", sweep_o.points, "surface samples per milestone wave");
    sweep_opt.flag("--streamlines", "streamlines", sweep_o.streamlines, "trace streamlines in milestone waves");

    auto* solve = app.add_subcommand("solve", "solve for the wave with a given vortex altitude");
    Common solve_c;
    WaveOpts solve_w;
    double solve_beta = 0.0;
    Options solve_opt(solve);
    add_common(solve_opt, solve_c);
    add_wave(solve_opt, solve_w);
    solve_opt.add("--beta", "beta", solve_beta, "vortex altitude in the conformal strip");

    auto* validate = app.add_subcommand("validate", "run the oracle cross-checks");
    Common val_c;
    std::vector<std::string> val_only;
    std::string val_fault;
    Options val_opt(validate);
    add_common(val_opt, val_c);
    val_opt.add("--only", "only", val_only, "comma-separated check groups")->delimiter(',');
    val_opt.add("--inject-fault", "inject_fault", val_fault, "")->group("");

    auto* trace = app.add_subcommand("trace", "streamlines and surface of a stored solution");
    Common trace_c;
    std::string trace_in;
    int trace_seeds = 6, trace_points = 1025;
    Options trace_opt(trace);
    add_common(trace_opt, trace_c);
    trace_opt.add("--input", "input", trace_in, "solution JSON")->check(CLI::ExistingFile);
    trace_opt.add("--seeds", "seeds", trace_seeds, "streamline seeds between the vortex and the surface");
    trace_opt.add("--points", "points", trace_points, "surface samples");

    auto* hollow = app.add_subcommand("hollow", "leading-order hollow vortex replacing the point vortex");
    Common hollow_c;
    std::string hollow_in;
    std::optional<double> hollow_beta;
    std::vector<double> hollow_rho;
    int hollow_nodes = 256;
    Options hollow_opt(hollow);
    add_common(hollow_opt, hollow_c);
    hollow_opt.add("--input", "input", hollow_in, "solution JSON used as the base")->check(CLI::ExistingFile);
    hollow_opt.add("--exact-beta", "exact_beta", hollow_beta, "use the closed-form zero-gravity wave at this altitude");
    hollow_opt.add("--rho", "rho", hollow_rho, "conformal core radii")->delimiter(',');
    hollow_opt.add("--nodes", "nodes", hollow_nodes, "boundary nodes");

    auto* asym = app.add_subcommand("asym", "small-amplitude prediction tables");
    Common asym_c;
    WaveOpts asym_w;
    std::vector<double> asym_beta;
    Options asym_opt(asym);
    add_common(asym_opt, asym_c);
    {
        auto* d = asym_opt.add("--delta", "delta", asym_w.delta, "gravity coefficient 1/F^2");
        auto* f = asym_opt.add("--froude", "froude", asym_w.froude, "Froude number F");
        d->excludes(f);
    }
    asym_opt.add("--beta", "beta", asym_beta, "vortex altitudes")->delimiter(',');

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    auto dispatch = [&](Options& o, Common& c, const std::function<int(const json&)>& run) -> int {
        o.apply_config(load_config(c));
        return run(o.resolved());
    };

    Common* active = nullptr;
    try {
        if (sweep->parsed()) {
            active = &sweep_c;
            return dispatch(sweep_opt, sweep_c, [&](const json& cfg) { return run_sweep(sweep_c, sweep_w, sweep_o, cfg); });
        }
        if (solve->parsed()) {
            active = &solve_c;
            return dispatch(solve_opt, solve_c, [&](const json& cfg) {
                if (!solve_opt.given("beta")) throw UsageError("solve needs --beta");
                return run_solve(solve_c, solve_w, solve_beta, cfg);
            });
        }
        if (validate->parsed()) {
            active = &val_c;
            return dispatch(val_opt, val_c, [&](const json& cfg) { return run_validate(val_c, val_only, val_fault, cfg); });
        }
        if (trace->parsed()) {
            active = &trace_c;
            return dispatch(trace_opt, trace_c, [&](const json& cfg) {
                if (trace_in.empty()) throw UsageError("trace needs --input");
                return run_trace(trace_c, trace_in, trace_seeds, trace_points, cfg);
            });
        }
        if (hollow->parsed()) {
            active = &hollow_c;
            return dispatch(hollow_opt, hollow_c,
                            [&](const json& cfg) { return run_hollow(hollow_c, hollow_in, hollow_beta, hollow_rho, hollow_nodes, cfg); });
        }
        if (asym->parsed()) {
            active = &asym_c;
            return dispatch(asym_opt, asym_c, [&](const json& cfg) { return run_asym(asym_c, asym_w, asym_beta, cfg); });
        }
    } catch (const UsageError& e) {
        std::cerr << "usage error: " << e.what() << '\n';
        return 2;
    } catch (const wbv::SchemaError& e) {
        report_failure(*active, "schema", e.what());
        return 1;
    } catch (const wbv::IoError& e) {
        report_failure(*active, "io", e.what());
        return 1;
    } catch (const wbv::Error& e) {
        report_failure(*active, "solver", e.what());
        return 1;
    } catch (const std::exception& e) {
        report_failure(*active, "internal", e.what());
        return 1;
    }
    return 2;
}
