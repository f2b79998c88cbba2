// =============================================================================
// thermofix command line tool
// =============================================================================
//
// Subcommands map onto the library modules:
//
//   analyze-siso      scalar hotspot analysis: existence test, fixed points,
//                     classification of a starting temperature
//   solve-fixed-point Newton solve of the coupled fixed point
//   sweep-convergence guaranteed-convergence map over a power grid
//   simulate          transient run under a piecewise-constant schedule
//   fit               first-order settling fit of a recorded trace column
//   govern            scenario playback under a governor policy
//   bench-newton      plain versus accelerated Newton step timings
//
// Temperatures cross this boundary in celsius; the library works in kelvin.
// stdout carries exactly one line, the path of the primary report. Progress
// goes to stderr; on failure the last stderr line is a JSON error object.

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "thermofix/thermofix.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using nlohmann::ordered_json;

namespace {

#ifndef THERMOFIX_DEFAULT_MODEL
#define THERMOFIX_DEFAULT_MODEL "data/default_soc.json"
#endif

struct GlobalOptions {
    std::string model_path = THERMOFIX_DEFAULT_MODEL;
    std::string out_dir = "out";
    std::int64_t seed = -1;  ///< overrides scenario noise seed when >= 0
    std::string format = "default";
};

void progress(const std::string& line) { std::cerr << "[thermofix] " << line << "\n"; }

/// Parses repeated "resource=watts" specs onto a power vector.
thermofix::Vector parse_power_spec(const thermofix::ThermalModel& model,
                                   const std::vector<std::string>& specs) {
    thermofix::Vector p = thermofix::Vector::Zero(model.m());
    for (const auto& spec : specs) {
        const auto eq = spec.find('=');
        if (eq == std::string::npos)
            throw std::invalid_argument("power spec '" + spec + "' is not resource=watts");
        const std::string name = spec.substr(0, eq);
        const double watts = std::stod(spec.substr(eq + 1));
        p[model.resource_index(name)] = watts;
    }
    return p;
}

std::string write_report(const GlobalOptions& opt, const std::string& name,
                         const std::string& content) {
    const fs::path path = fs::path(opt.out_dir) / name;
    thermofix::write_file_atomic(path, content);
    return path.string();
}

std::string write_json_report(const GlobalOptions& opt, const std::string& name,
                              const ordered_json& j) {
    return write_report(opt, name, j.dump(2) + "\n");
}

void finish(const GlobalOptions& opt, const std::string& command,
            const std::vector<std::string>& argv, const std::vector<std::string>& outputs,
            const std::string& primary) {
    thermofix::write_manifest(opt.out_dir, command, argv, outputs);
    std::cout << primary << "\n";
}

/// Splits a CSV document into rows of fields (no quoted fields expected).
std::vector<std::vector<std::string>> parse_csv(const std::string& text) {
    std::vector<std::vector<std::string>> rows;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::vector<std::string> row;
        std::string field;
        std::istringstream ls(line);
        while (std::getline(ls, field, ',')) row.push_back(field);
        rows.push_back(std::move(row));
    }
    return rows;
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

// =============================================================================
// analyze-siso
// =============================================================================

struct SisoArgs {
    double a = 0.9994;
    double b = 0.0121;
    double p_c = 1.18;
    double v = 1.05;
    double kappa1 = 6.0e-6;
    double kappa2 = -1000.0;
    std::optional<double> start_celsius;
    bool expect_stable = false;
};

int run_analyze_siso(const GlobalOptions& opt, const SisoArgs& args,
                     const std::vector<std::string>& argv) {
    using namespace thermofix;
    const auto ab = derive_alpha_beta(args.a, args.b, args.p_c, args.v, args.kappa1, args.kappa2);
    const auto ex = existence_test(ab.alpha, ab.beta);
    progress("alpha " + std::to_string(ab.alpha) + ", beta " + std::to_string(ab.beta) +
             ", margin " + std::to_string(ex.margin));

    ordered_json j;
    j["inputs"] = {{"a", args.a},          {"b", args.b},
                   {"p_c_w", args.p_c},    {"v", args.v},
                   {"kappa1", args.kappa1}, {"kappa2", args.kappa2}};
    j["alpha"] = ab.alpha;
    j["beta"] = ab.beta;
    j["t_tilde_max"] = ex.t_tilde_m;
    j["beta_critical"] = ex.beta_crit;
    j["margin"] = ex.margin;
    j["two_fixed_points"] = ex.two_fixed_points;
    j["marginal"] = ex.marginal;

    bool stable_ok = ex.two_fixed_points;
    if (ex.two_fixed_points) {
        const auto pts = kelvin_fixed_points(ab.alpha, ab.beta, args.kappa2);
        const auto aux = solve_fixed_points(ab.alpha, ab.beta);
        j["fixed_points"] = {{"t_tilde_unstable", aux.t_tilde_u},
                             {"t_tilde_stable", aux.t_tilde_s},
                             {"unstable_celsius", to_celsius(pts.t_unstable)},
                             {"stable_celsius", to_celsius(pts.t_stable)}};
    }
    if (args.start_celsius) {
        ordered_json start;
        start["celsius"] = *args.start_celsius;
        if (ex.two_fixed_points) {
            const double t0 = to_auxiliary(to_kelvin(*args.start_celsius), args.kappa2);
            const auto cls = classify_start(ab.alpha, ab.beta, t0);
            start["t_tilde"] = t0;
            start["classification"] =
                cls == StartClass::runaway ? "runaway" : "converges_to_stable";
            if (cls == StartClass::runaway) stable_ok = false;
        } else {
            start["classification"] = "runaway";
            stable_ok = false;
        }
        j["start"] = start;
    }

    const auto path = write_json_report(opt, "siso_report.json", j);
    finish(opt, "analyze-siso", argv, {path}, path);
    if (args.expect_stable && !stable_ok) {
        progress("expectation violated: no stable outcome");
        return 2;
    }
    return 0;
}

// =============================================================================
// solve-fixed-point
// =============================================================================

struct SolveArgs {
    std::vector<std::string> power;
    bool plain = false;
    std::string start = "ambient";
    double tol = 1e-6;
    int max_iter = 50;
    bool expect_stable = false;
};

int run_solve(const GlobalOptions& opt, const SolveArgs& args,
              const std::vector<std::string>& argv) {
    using namespace thermofix;
    const ThermalModel model = load_model(opt.model_path);
    const AcceleratedWorkspace ws = build_workspace(model);
    const Vector p_c = parse_power_spec(model, args.power);

    NewtonConfig cfg;
    cfg.tol = args.tol;
    cfg.max_iter = args.max_iter;
    cfg.use_acceleration = !args.plain;
    cfg.seed_from_siso = args.start == "siso";
    const MimoSolution sol = solve(model, ws, p_c, cfg);
    progress("converged " + std::string(sol.converged ? "yes" : "no") + " in " +
             std::to_string(sol.iterations) + " iterations");

    ordered_json j;
    j["converged"] = sol.converged;
    j["iterations"] = sol.iterations;
    j["residual_norm"] = sol.residual_norm;
    j["step_variant"] = args.plain ? "plain" : "accelerated";
    j["seed_strategy"] = args.start;
    j["out_of_domain"] = sol.out_of_domain;
    if (!sol.note.empty()) j["note"] = sol.note;
    ordered_json temps;
    for (Eigen::Index i = 0; i < model.n(); ++i)
        temps[model.hotspot_names[static_cast<std::size_t>(i)]] = to_celsius(sol.t_star[i]);
    j["temperatures_celsius"] = temps;
    ordered_json power;
    for (Eigen::Index k = 0; k < model.m(); ++k) {
        const auto& split = sol.p_star[static_cast<std::size_t>(k)];
        power[model.resource_names[static_cast<std::size_t>(k)]] = {
            {"configured_w", split.p_c}, {"leakage_w", split.p_leak}, {"total_w", split.total}};
    }
    if (!sol.p_star.empty()) j["power_w"] = power;

    const auto path = write_json_report(opt, "fixed_point.json", j);
    finish(opt, "solve-fixed-point", argv, {path}, path);
    if (args.expect_stable && (!sol.converged || sol.out_of_domain)) {
        progress("expectation violated: no stable fixed point in domain");
        return 2;
    }
    return 0;
}

// =============================================================================
// sweep-convergence
// =============================================================================

struct SweepArgs {
    thermofix::SweepSpec spec;
    std::vector<std::string> fixed;
};

int run_sweep(const GlobalOptions& opt, SweepArgs& args, const std::vector<std::string>& argv) {
    using namespace thermofix;
    const ThermalModel model = load_model(opt.model_path);
    const AcceleratedWorkspace ws = build_workspace(model);
    args.spec.fixed_powers = parse_power_spec(model, args.fixed);
    progress("sweeping " + std::to_string(args.spec.cpu_min) + ".." +
             std::to_string(args.spec.cpu_max) + " W against " +
             std::to_string(args.spec.gpu_min) + ".." + std::to_string(args.spec.gpu_max) + " W");

    const SweepResult result = sweep(model, ws, args.spec);
    const auto boundary = boundary_cells(result);
    const double knee = containment_knee(result);
    long guaranteed = 0;
    for (const auto& cell : result.cells)
        if (cell.guaranteed) ++guaranteed;
    progress(std::to_string(guaranteed) + "/" + std::to_string(result.cells.size()) +
             " cells guaranteed, knee " + std::to_string(knee) + " W");

    std::vector<std::vector<std::string>> rows;
    rows.push_back({"p_cpu_w", "p_gpu_w", "guaranteed", "range_contained", "max_jacobian_norm",
                    "singular"});
    for (const auto& cell : result.cells)
        rows.push_back({csv_number(cell.p_cpu), csv_number(cell.p_gpu),
                        cell.guaranteed ? "1" : "0", cell.range_contained ? "1" : "0",
                        csv_number(cell.max_jacobian_norm), cell.singular ? "1" : "0"});
    const auto sweep_path = write_report(opt, "sweep.csv", to_csv(rows));

    std::vector<std::vector<std::string>> brows;
    brows.push_back({"p_cpu_w", "p_gpu_w"});
    for (const auto idx : boundary)
        brows.push_back(
            {csv_number(result.cells[idx].p_cpu), csv_number(result.cells[idx].p_gpu)});
    const auto boundary_path = write_report(opt, "boundary.csv", to_csv(brows));

    ordered_json j;
    j["cpu_resource"] = model.resource_names[static_cast<std::size_t>(result.cpu_resource)];
    j["gpu_resource"] = model.resource_names[static_cast<std::size_t>(result.gpu_resource)];
    j["cells_total"] = result.cells.size();
    j["cells_guaranteed"] = guaranteed;
    j["boundary_cells"] = boundary.size();
    j["knee_total_w"] = knee;
    const auto summary_path = write_json_report(opt, "sweep_summary.json", j);

    const auto primary = opt.format == "json" ? summary_path : sweep_path;
    finish(opt, "sweep-convergence", argv, {sweep_path, boundary_path, summary_path}, primary);
    return 0;
}

// =============================================================================
// simulate
// =============================================================================

struct SimulateArgs {
    std::string schedule_path;
    std::optional<double> start_celsius;
};

int run_simulate(const GlobalOptions& opt, const SimulateArgs& args,
                 const std::vector<std::string>& argv) {
    using namespace thermofix;
    const ThermalModel model = load_model(opt.model_path);
    const json doc = json::parse(read_file(args.schedule_path));

    std::vector<ScheduleStep> schedule;
    for (const auto& segment : doc.at("schedule")) {
        ScheduleStep step_spec;
        step_spec.duration_s = segment.at("duration_s").get<double>();
        step_spec.p_c = Vector::Zero(model.m());
        for (const auto& [name, watts] : segment.at("p_c").items())
            step_spec.p_c[model.resource_index(name)] = watts.get<double>();
        schedule.push_back(std::move(step_spec));
    }
    if (schedule.empty()) throw std::runtime_error("schedule is empty");

    Vector t0;
    std::string start_mode = doc.value("start", "settled");
    if (args.start_celsius) {
        t0 = Vector::Constant(model.n(), to_kelvin(*args.start_celsius));
        start_mode = "uniform";
    } else if (start_mode == "settled") {
        const AcceleratedWorkspace ws = build_workspace(model);
        const MimoSolution idle = solve(model, ws, schedule.front().p_c);
        if (!idle.converged)
            throw std::runtime_error("no settled start: first segment has no stable fixed point");
        t0 = idle.t_star;
    } else {
        t0 = Vector::Constant(model.n(), to_kelvin(std::stod(start_mode)));
    }
    progress("start mode " + start_mode + ", " + std::to_string(schedule.size()) + " segments");

    const Trace trace = simulate(model, t0, schedule);
    progress(std::to_string(trace.times.size()) + " samples" +
             (trace.runaway ? ", runaway" : ""));

    std::vector<std::vector<std::string>> rows;
    std::vector<std::string> header{"time_s"};
    for (const auto& name : model.hotspot_names) header.push_back(name + "_c");
    header.push_back("p_total_w");
    rows.push_back(header);
    for (std::size_t k = 0; k < trace.times.size(); ++k) {
        std::vector<std::string> row{csv_number(trace.times[k])};
        for (Eigen::Index i = 0; i < model.n(); ++i)
            row.push_back(csv_number(to_celsius(trace.temps[k][i])));
        row.push_back(csv_number(trace.powers[k].sum()));
        rows.push_back(std::move(row));
    }
    const auto trace_path = write_report(opt, "trace.csv", to_csv(rows));

    ordered_json j;
    j["samples"] = trace.times.size();
    j["duration_s"] = trace.times.back();
    j["runaway"] = trace.runaway;
    ordered_json finals;
    for (Eigen::Index i = 0; i < model.n(); ++i)
        finals[model.hotspot_names[static_cast<std::size_t>(i)]] =
            to_celsius(trace.temps.back()[i]);
    j["final_celsius"] = finals;
    const auto summary_path = write_json_report(opt, "simulate_summary.json", j);

    const auto primary = opt.format == "json" ? summary_path : trace_path;
    finish(opt, "simulate", argv, {trace_path, summary_path}, primary);
    return 0;
}

// =============================================================================
// fit
// =============================================================================

struct FitArgs {
    std::string trace_path;
    std::string column = "hottest";
    std::size_t window = 10;
    double from_s = 0.0;
    double to_s = std::numeric_limits<double>::infinity();
    double delta = 1.0;
};

int run_fit(const GlobalOptions& opt, const FitArgs& args, const std::vector<std::string>& argv) {
    using namespace thermofix;
    const auto rows = parse_csv(read_file(args.trace_path));
    if (rows.size() < 4) throw std::runtime_error("trace has too few rows");
    const auto& header = rows.front();
    if (header.empty() || header.front() != "time_s")
        throw std::runtime_error("trace must start with a time_s column");

    std::vector<std::size_t> value_cols;
    if (args.column == "hottest") {
        for (std::size_t c = 1; c < header.size(); ++c)
            if (header[c].size() > 2 && header[c].substr(header[c].size() - 2) == "_c")
                value_cols.push_back(c);
        if (value_cols.empty()) throw std::runtime_error("no *_c columns in trace");
    } else {
        for (std::size_t c = 0; c < header.size(); ++c)
            if (header[c] == args.column || header[c] == args.column + "_c")
                value_cols.push_back(c);
        if (value_cols.size() != 1)
            throw std::runtime_error("column not found: " + args.column);
    }

    std::vector<double> times;
    std::vector<double> values;
    for (std::size_t r = 1; r < rows.size(); ++r) {
        const double time_s = std::stod(rows[r].at(0));
        if (time_s < args.from_s || time_s > args.to_s) continue;
        double value = -std::numeric_limits<double>::infinity();
        for (const auto c : value_cols) value = std::max(value, std::stod(rows[r].at(c)));
        times.push_back(time_s);
        values.push_back(to_kelvin(value));
    }
    if (times.size() < 3) throw std::runtime_error("selected range has too few samples");
    progress("fitting " + std::to_string(times.size()) + " samples of " + args.column);

    const std::vector<double> series =
        args.window > 0 ? envelope(values, args.window) : values;
    const FirstOrderFit fit = fit_first_order(times, series);
    const double eta = time_to_fixed_point(fit, times.back() - times.front(), args.delta);
    progress("tau " + std::to_string(fit.tau) + " s, settled value " +
             std::to_string(to_celsius(fit.t_final)) + " C");

    ordered_json j;
    j["column"] = args.column;
    j["samples"] = times.size();
    j["envelope_window"] = args.window;
    j["t0_celsius"] = to_celsius(fit.t0);
    j["t_final_celsius"] = to_celsius(fit.t_final);
    j["tau_s"] = fit.tau;
    j["rmse_k"] = fit.rmse;
    j["converged"] = fit.converged;
    j["delta_k"] = args.delta;
    j["eta_s"] = eta;
    const auto path = write_json_report(opt, "fit.json", j);
    finish(opt, "fit", argv, {path}, path);
    return 0;
}

// =============================================================================
// govern
// =============================================================================

struct GovernArgs {
    std::string scenario_path;
    std::string policy = "predictive";
};

int run_govern(const GlobalOptions& opt, const GovernArgs& args,
               const std::vector<std::string>& argv) {
    using namespace thermofix;
    const ThermalModel model = load_model(opt.model_path);
    Scenario sc = scenario_from_json(json::parse(read_file(args.scenario_path)), model);
    if (opt.seed >= 0) sc.noise_seed = static_cast<std::uint64_t>(opt.seed);
    const Policy policy = parse_policy(args.policy);
    progress("scenario " + sc.name + " for " + std::to_string(sc.duration_s) + " s under " +
             args.policy);

    const ScenarioSummary summary = run_scenario(model, sc, policy);
    progress("time above limit " + std::to_string(summary.time_above_limit_s) + " s, peak " +
             std::to_string(to_celsius(summary.peak_temp)) + " C, " +
             std::to_string(summary.migrations) + " migrations");

    std::vector<std::vector<std::string>> rows;
    rows.push_back({"time_s", "t_hot_true_c", "t_hot_meas_c", "level", "p_big_w", "p_little_w",
                    "p_gpu_w", "imminent", "migrate_pid"});
    for (const auto& rec : summary.records)
        rows.push_back({csv_number(rec.time_s), csv_number(to_celsius(rec.t_hot_true)),
                        csv_number(to_celsius(rec.t_hot_meas)),
                        std::to_string(rec.level), csv_number(rec.p_big),
                        csv_number(rec.p_little), csv_number(rec.p_gpu),
                        rec.imminent ? "1" : "0", std::to_string(rec.migrate_pid)});
    const auto trace_path = write_report(opt, "govern_trace.csv", to_csv(rows));

    ordered_json j;
    j["scenario"] = summary.scenario;
    j["policy"] = policy_name(summary.policy);
    j["duration_s"] = summary.duration_s;
    j["time_above_limit_s"] = summary.time_above_limit_s;
    j["peak_celsius"] = to_celsius(summary.peak_temp);
    j["migrations"] = summary.migrations;
    j["imminent_ticks"] = summary.imminent_ticks;
    j["conservative_ticks"] = summary.conservative_ticks;
    j["final_level"] = summary.final_level;
    j["runaway"] = summary.runaway;
    ordered_json procs = ordered_json::array();
    for (const auto& po : summary.processes)
        procs.push_back({{"pid", po.pid},
                         {"name", po.name},
                         {"realtime", po.realtime},
                         {"active_s", po.active_s},
                         {"proxy_units", po.proxy_units},
                         {"proxy_fraction", po.proxy_fraction},
                         {"migrations", po.migrations}});
    j["processes"] = procs;
    const auto summary_path = write_json_report(opt, "govern_summary.json", j);

    const auto primary = opt.format == "csv" ? trace_path : summary_path;
    finish(opt, "govern", argv, {trace_path, summary_path}, primary);
    return 0;
}

// =============================================================================
// bench-newton
// =============================================================================

struct BenchArgs {
    int iters = 10;
    int reps = 1000;
    int warmup = 100;
    std::vector<std::string> power;
};

int run_bench(const GlobalOptions& opt, const BenchArgs& args,
              const std::vector<std::string>& argv) {
    using namespace thermofix;
    const ThermalModel model = load_model(opt.model_path);
    Vector p_c = parse_power_spec(model, args.power);
    progress("timing 1.." + std::to_string(args.iters) + " iterations, " +
             std::to_string(args.reps) + " reps each");

    const BenchResult result = bench_newton(model, p_c, args.iters, args.reps, args.warmup);
    std::vector<std::vector<std::string>> rows;
    rows.push_back({"iterations", "plain_ns", "accelerated_ns", "speedup"});
    double max_speedup = 0.0;
    for (const auto& row : result.rows) {
        rows.push_back({std::to_string(row.iterations), csv_number(row.plain_ns),
                        csv_number(row.accelerated_ns), csv_number(row.speedup)});
        max_speedup = std::max(max_speedup, row.speedup);
    }
    const auto csv_path = write_report(opt, "bench.csv", to_csv(rows));

    ordered_json j;
    j["repetitions"] = args.reps;
    j["warmup"] = args.warmup;
    j["max_speedup"] = max_speedup;
    j["checksum"] = result.checksum;
    const auto summary_path = write_json_report(opt, "bench_summary.json", j);
    progress("max speedup " + std::to_string(max_speedup));

    const auto primary = opt.format == "json" ? summary_path : csv_path;
    finish(opt, "bench-newton", argv, {csv_path, summary_path}, primary);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    GlobalOptions opt;
    CLI::App app{
        "Power-temperature fixed points, convergence maps, and proactive thermal control "
        "for multiprocessor thermal models"};
    app.require_subcommand(1);
    app.add_option("--model", opt.model_path, "Thermal model JSON")->capture_default_str();
    app.add_option("--out", opt.out_dir, "Report directory")->capture_default_str();
    app.add_option("--seed", opt.seed, "Override the scenario noise seed (-1 keeps it)")
        ->capture_default_str();
    app.add_option("--format", opt.format, "Primary report format where both exist")
        ->check(CLI::IsMember({"default", "json", "csv"}))
        ->capture_default_str();

    SisoArgs siso;
    auto* c_siso = app.add_subcommand(
        "analyze-siso", "Scalar hotspot analysis: fixed-point existence and start classification");
    c_siso->add_option("--a", siso.a, "Retention coefficient, in (0,1)")->capture_default_str();
    c_siso->add_option("--b", siso.b, "Power gain, kelvin per watt step")->capture_default_str();
    c_siso->add_option("--pc", siso.p_c, "Configured power, watts")->capture_default_str();
    c_siso->add_option("--v", siso.v, "Leakage voltage factor")->capture_default_str();
    c_siso->add_option("--kappa1", siso.kappa1, "Leakage curvature factor")->capture_default_str();
    c_siso->add_option("--kappa2", siso.kappa2, "Leakage exponent, negative kelvin")
        ->capture_default_str();
    double start_c = 0.0;
    auto* start_opt =
        c_siso->add_option("--start-celsius", start_c, "Classify this starting temperature");
    c_siso->add_flag("--expect-stable", siso.expect_stable,
                     "Exit 2 unless a stable outcome is certain");

    SolveArgs solve_args;
    auto* c_solve =
        app.add_subcommand("solve-fixed-point", "Newton solve of the coupled fixed point");
    c_solve->add_option("--power", solve_args.power, "resource=watts, repeatable");
    c_solve->add_flag("--plain", solve_args.plain, "Use the dense Newton step");
    c_solve->add_option("--start", solve_args.start, "Seed strategy")
        ->check(CLI::IsMember({"ambient", "siso"}))
        ->capture_default_str();
    c_solve->add_option("--tol", solve_args.tol, "Step max-norm tolerance, kelvin")
        ->capture_default_str();
    c_solve->add_option("--max-iter", solve_args.max_iter, "Iteration cap")->capture_default_str();
    c_solve->add_flag("--expect-stable", solve_args.expect_stable,
                      "Exit 2 unless converged inside the domain");

    SweepArgs sweep_args;
    auto* c_sweep = app.add_subcommand("sweep-convergence",
                                       "Map guaranteed Newton convergence over a power grid");
    c_sweep->add_option("--cpu-min", sweep_args.spec.cpu_min, "Watts")->capture_default_str();
    c_sweep->add_option("--cpu-max", sweep_args.spec.cpu_max, "Watts")->capture_default_str();
    c_sweep->add_option("--cpu-step", sweep_args.spec.cpu_step, "Watts")->capture_default_str();
    c_sweep->add_option("--gpu-min", sweep_args.spec.gpu_min, "Watts")->capture_default_str();
    c_sweep->add_option("--gpu-max", sweep_args.spec.gpu_max, "Watts")->capture_default_str();
    c_sweep->add_option("--gpu-step", sweep_args.spec.gpu_step, "Watts")->capture_default_str();
    c_sweep->add_option("--density", sweep_args.spec.temp_grid_density,
                        "Probe points per temperature axis")
        ->capture_default_str();
    c_sweep->add_option("--fd-step", sweep_args.spec.fd_step, "Finite-difference step, kelvin")
        ->capture_default_str();
    c_sweep->add_option("--fixed", sweep_args.fixed, "resource=watts held fixed, repeatable");

    SimulateArgs sim_args;
    auto* c_sim =
        app.add_subcommand("simulate", "Transient run under a piecewise-constant schedule");
    c_sim->add_option("--schedule", sim_args.schedule_path, "Schedule JSON")->required();
    double sim_start_c = 0.0;
    auto* sim_start_opt =
        c_sim->add_option("--start-celsius", sim_start_c, "Uniform starting temperature");

    FitArgs fit_args;
    auto* c_fit = app.add_subcommand("fit", "First-order settling fit of a recorded trace");
    c_fit->add_option("--trace", fit_args.trace_path, "Trace CSV")->required();
    c_fit->add_option("--column", fit_args.column, "Hotspot column or 'hottest'")
        ->capture_default_str();
    c_fit->add_option("--window", fit_args.window, "Envelope window, samples; 0 fits raw data")
        ->capture_default_str();
    c_fit->add_option("--from-s", fit_args.from_s, "Range start, seconds")->capture_default_str();
    c_fit->add_option("--to-s", fit_args.to_s, "Range end, seconds");
    c_fit->add_option("--delta", fit_args.delta, "Settled tolerance, kelvin")
        ->capture_default_str();

    GovernArgs gov_args;
    auto* c_gov = app.add_subcommand("govern", "Play a workload scenario under a policy");
    c_gov->add_option("--scenario", gov_args.scenario_path, "Scenario JSON")->required();
    c_gov->add_option("--policy", gov_args.policy, "Control policy")
        ->check(CLI::IsMember({"predictive", "baseline", "none"}))
        ->capture_default_str();

    BenchArgs bench_args;
    auto* c_bench =
        app.add_subcommand("bench-newton", "Time plain versus accelerated Newton solves");
    c_bench->add_option("--iters", bench_args.iters, "Largest iteration cap")
        ->capture_default_str();
    c_bench->add_option("--reps", bench_args.reps, "Repetitions per timing")
        ->capture_default_str();
    c_bench->add_option("--warmup", bench_args.warmup, "Warmup repetitions")
        ->capture_default_str();
    c_bench->add_option("--power", bench_args.power, "resource=watts, repeatable");

    std::vector<std::string> argv_copy(argv, argv + argc);
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        if (code != 0)
            std::cerr << ordered_json{{"error", e.what()}, {"command", "parse"}}.dump() << "\n";
        return code == 0 ? 0 : 1;
    }

    const std::string command = app.get_subcommands().front()->get_name();
    try {
        if (*start_opt) siso.start_celsius = start_c;
        if (*sim_start_opt) sim_args.start_celsius = sim_start_c;
        if (*c_siso) return run_analyze_siso(opt, siso, argv_copy);
        if (*c_solve) return run_solve(opt, solve_args, argv_copy);
        if (*c_sweep) return run_sweep(opt, sweep_args, argv_copy);
        if (*c_sim) return run_simulate(opt, sim_args, argv_copy);
        if (*c_fit) return run_fit(opt, fit_args, argv_copy);
        if (*c_gov) return run_govern(opt, gov_args, argv_copy);
        if (*c_bench) return run_bench(opt, bench_args, argv_copy);
        throw std::logic_error("no subcommand dispatched");
    } catch (const std::exception& e) {
        progress(std::string("failed: ") + e.what());
        std::cerr << ordered_json{{"error", e.what()}, {"command", command}}.dump() << "\n";
        return 1;
    }
}
