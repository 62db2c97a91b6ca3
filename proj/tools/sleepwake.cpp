// Command-line front end for the sleep/wake simulation toolkit.
//
// Subcommands: simulate, stability, sweep, search, knockout, replay, analyze.
// Exit codes: 0 success, 1 domain error, 2 usage error.

#include <complex>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "sleepwake/analysis.hpp"
#include "sleepwake/errors.hpp"
#include "sleepwake/experiments.hpp"
#include "sleepwake/io.hpp"
#include "sleepwake/params.hpp"

namespace sw = sleepwake;

namespace {

struct CommonOptions {
    std::string params_path;
    double hours = 216.0;
    double step = 0.002;
    double discard = 48.0;
    int stride = 1;
    double rem_threshold = 0.5;
};

sw::ModelParameters load_params(const CommonOptions& opt) {
    if (opt.params_path.empty()) return sw::default_parameters();
    std::vector<std::string> notices;
    const sw::CoefficientTable table =
        sw::parse_parameter_file(opt.params_path, &notices);
    for (const auto& n : notices) std::clog << "note: " << n << "\n";
    return sw::assemble_parameters(table);
}

sw::SimulationConfig make_config(const CommonOptions& opt) {
    sw::SimulationConfig cfg;
    cfg.t_end = opt.hours;
    cfg.step = opt.step;
    cfg.transient_discard = opt.discard;
    cfg.record_stride = opt.stride;
    cfg.rem_threshold = opt.rem_threshold;
    return cfg;
}

std::string join_args(int argc, char** argv) {
    std::ostringstream out;
    for (int i = 0; i < argc; ++i) {
        if (i) out << ' ';
        out << argv[i];
    }
    return out.str();
}

void print_bout_summary(std::ostream& out, const std::string& label,
                        const sw::BoutReport& report) {
    out << label << ": cycles=" << report.periods.size()
        << " mean_period=" << report.mean_period
        << " period_cv=" << report.period_cv
        << " wake_fraction=" << report.wake_fraction;
    if (!report.rem_counts.empty()) {
        out << " rem_counts=[";
        for (size_t i = 0; i < report.rem_counts.size(); ++i) {
            out << (i ? "," : "") << report.rem_counts[i];
        }
        out << "]";
    }
    out << "\n";
}

void write_report_json(const nlohmann::json& j, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw sw::IoError("cannot write report '" + path + "'");
    out << j.dump(2) << '\n';
}

int cmd_simulate(const CommonOptions& common, const std::string& out_path,
                 const std::string& schedule_path, const std::string& plot_kind,
                 const std::string& command_line) {
    const sw::ModelParameters params = load_params(common);
    const sw::SimulationConfig cfg = make_config(common);
    sw::PerturbationSchedule schedule;
    if (!schedule_path.empty()) schedule = sw::parse_schedule(schedule_path);

    const sw::Trajectory traj =
        sw::simulate(params, cfg, sw::default_initial_state(), schedule);
    sw::write_trajectory_csv(traj, out_path);
    sw::write_metadata_sidecar(traj, command_line, out_path + ".meta.json");
    if (!plot_kind.empty()) {
        sw::emit_plot_data(traj, sw::plot_kind_from_string(plot_kind),
                           out_path + "." + plot_kind + ".csv");
    }

    const sw::BoutReport report = sw::analyze_trajectory(traj);
    print_bout_summary(std::cout, "simulate", report);
    for (const auto& [name, count] : traj.warnings) {
        std::clog << "warning: " << name << " (" << count << ")\n";
    }
    std::cout << "wrote " << out_path << "\n";
    return 0;
}

int cmd_stability(const CommonOptions& common, double epsilon) {
    const sw::ModelParameters params = load_params(common);
    const sw::StabilityReport slow = sw::stability_report_slow(params, epsilon);
    std::cout << "epsilon: " << epsilon << "\n";
    std::cout << "fixed point: gaba_vlpo=" << slow.fixed_point.gaba_vlpo
              << " ad=" << slow.fixed_point.ad
              << " residual=" << slow.fixed_point.residual << "\n";
    std::cout << "slow jacobian: [[" << slow.jacobian(0, 0) << ", "
              << slow.jacobian(0, 1) << "], [" << slow.jacobian(1, 0) << ", "
              << slow.jacobian(1, 1) << "]]\n";
    std::cout << "slow eigenvalues:";
    for (const auto& z : slow.eigenvalues) {
        std::cout << " (" << z.real() << (z.imag() < 0 ? "" : "+") << z.imag() << "i)";
    }
    std::cout << "\nslow classification: " << sw::to_string(slow.classification)
              << "\n";

    const sw::StabilityReport full = sw::stability_report_full(params, epsilon);
    std::cout << "full (11x11) classification: " << sw::to_string(full.classification)
              << "\nfull eigenvalues:";
    for (const auto& z : full.eigenvalues) {
        std::cout << " (" << z.real() << (z.imag() < 0 ? "" : "+") << z.imag() << "i)";
    }
    std::cout << "\nfast block max Re(eig): " << sw::fast_block_max_real_part(params)
              << "\n";
    return 0;
}

int cmd_sweep(const CommonOptions& common, double lo, double hi, double resolution,
              const std::string& out_path, bool serial) {
    const sw::ModelParameters params = load_params(common);
    sw::SweepOptions opt;
    opt.lo = lo;
    opt.hi = hi;
    opt.resolution = resolution;
    const sw::SweepResult result = serial
                                       ? sw::epsilon_stability_sweep_serial(params, opt)
                                       : sw::epsilon_stability_sweep(params, opt);

    for (const auto& pt : result.points) {
        std::cout << "eps=" << pt.epsilon;
        if (!pt.has_fixed_point) {
            std::cout << " no fixed point\n";
            continue;
        }
        std::cout << " slow=" << sw::to_string(pt.slow_class)
                  << " full=" << sw::to_string(pt.full_class)
                  << " trace=" << pt.trace << " det=" << pt.det
                  << (pt.bounded ? " bounded" : " escapes")
                  << (pt.oscillatory ? " [oscillatory]" : "") << "\n";
    }
    if (result.window_found) {
        std::cout << "oscillatory window: (" << result.lower.epsilon << " ["
                  << sw::to_string(result.lower.kind) << ", trace "
                  << result.lower.trace_at_boundary << "], " << result.upper.epsilon
                  << " [" << sw::to_string(result.upper.kind) << ", trace "
                  << result.upper.trace_at_boundary << "])\n";
        std::cout << "reference window for comparison: (0.29, 0.32]\n";
        std::cout << "endpoint gaps: lower " << std::abs(result.lower.epsilon - 0.29)
                  << ", upper " << std::abs(result.upper.epsilon - 0.32) << "\n";
    } else {
        std::cout << "no oscillatory window found in [" << lo << ", " << hi << "]\n";
    }
    if (!out_path.empty()) {
        nlohmann::json j;
        j["format_version"] = sw::kFormatVersion;
        j["window_found"] = result.window_found;
        if (result.window_found) {
            j["lower"] = {{"epsilon", result.lower.epsilon},
                          {"kind", sw::to_string(result.lower.kind)},
                          {"trace", result.lower.trace_at_boundary}};
            j["upper"] = {{"epsilon", result.upper.epsilon},
                          {"kind", sw::to_string(result.upper.kind)},
                          {"trace", result.upper.trace_at_boundary}};
        }
        j["points"] = nlohmann::json::array();
        for (const auto& pt : result.points) {
            j["points"].push_back({{"epsilon", pt.epsilon},
                                   {"oscillatory", pt.oscillatory},
                                   {"trace", pt.trace},
                                   {"det", pt.det},
                                   {"bounded", pt.bounded},
                                   {"slow_class", sw::to_string(pt.slow_class)},
                                   {"full_class", sw::to_string(pt.full_class)}});
        }
        write_report_json(j, out_path);
        std::cout << "wrote " << out_path << "\n";
    }
    return 0;
}

int cmd_search(const CommonOptions&, uint64_t seed, int max_iterations,
               const std::string& out_path, bool serial) {
    sw::SearchConstraints cons;
    cons.bounds = sw::default_search_bounds();
    cons.seed = seed;
    cons.max_iterations = max_iterations;
    cons.parallel = !serial;
    const sw::SearchResult result = sw::search_coefficients(cons);
    for (const auto& line : result.log) std::cout << line << "\n";
    std::cout << (result.accepted ? "accepted" : "exhausted (best kept)")
              << ": max Re(eig) = " << result.max_real_part << " after "
              << result.iterations << " candidates\n";
    if (!out_path.empty()) {
        sw::write_parameter_file(result.table, out_path);
        std::cout << "wrote " << out_path << "\n";
    }
    return result.accepted ? 0 : 1;
}

int cmd_knockout(const CommonOptions& common, double factor,
                 const std::string& out_path) {
    const sw::ModelParameters params = load_params(common);
    const sw::SimulationConfig cfg = make_config(common);
    const sw::KnockoutComparison cmp = sw::run_orexin_knockout(
        params, cfg, sw::default_initial_state(), factor);
    print_bout_summary(std::cout, "baseline", cmp.baseline);
    print_bout_summary(std::cout, "knockout", cmp.knockout);
    std::cout << "relative period change: " << cmp.period_change_rel << "\n";
    std::cout << "mean OX baseline=" << cmp.mean_ox_baseline
              << " knockout=" << cmp.mean_ox_knockout << "\n";
    if (!out_path.empty()) {
        nlohmann::json j;
        j["format_version"] = sw::kFormatVersion;
        j["factor"] = factor;
        j["period_change_rel"] = cmp.period_change_rel;
        j["mean_ox_baseline"] = cmp.mean_ox_baseline;
        j["mean_ox_knockout"] = cmp.mean_ox_knockout;
        j["baseline"] = {{"mean_period", cmp.baseline.mean_period},
                         {"period_cv", cmp.baseline.period_cv},
                         {"wake_fraction", cmp.baseline.wake_fraction}};
        j["knockout"] = {{"mean_period", cmp.knockout.mean_period},
                         {"period_cv", cmp.knockout.period_cv},
                         {"wake_fraction", cmp.knockout.wake_fraction}};
        write_report_json(j, out_path);
        std::cout << "wrote " << out_path << "\n";
    }
    return 0;
}

int cmd_replay(const CommonOptions& common, const std::string& schedule_path,
               uint64_t sample_seed, bool use_sample, const std::string& out_prefix,
               const std::string& command_line) {
    const sw::ModelParameters params = load_params(common);
    const sw::SimulationConfig cfg = make_config(common);
    sw::PerturbationSchedule schedule;
    if (use_sample) {
        schedule = sw::make_sleep_camp_schedule(sample_seed);
    } else {
        schedule = sw::parse_schedule(schedule_path);
    }
    const sw::ReplayResult result =
        sw::replay_schedule(schedule, params, cfg, sw::default_initial_state());

    print_bout_summary(std::cout, "perturbed", result.bouts);
    print_bout_summary(std::cout, "reference", result.reference_bouts);
    std::cout << "post-schedule period cv: " << result.post_schedule_period_cv << "\n";
    std::cout << "drift: final_offset=" << result.drift.final_offset
              << "h recovered=" << (result.drift.recovered ? "yes" : "no")
              << " (reference period " << result.drift.reference_period << "h)\n";

    if (!out_prefix.empty()) {
        sw::write_trajectory_csv(result.perturbed, out_prefix + "_perturbed.csv");
        sw::write_metadata_sidecar(result.perturbed, command_line,
                                   out_prefix + "_perturbed.csv.meta.json");
        sw::write_trajectory_csv(result.reference, out_prefix + "_reference.csv");
        sw::write_metadata_sidecar(result.reference, command_line,
                                   out_prefix + "_reference.csv.meta.json");
        sw::emit_plot_data(result.drift, sw::PlotKind::Drift,
                           out_prefix + "_drift.csv");
        if (use_sample) sw::write_schedule(schedule, out_prefix + "_schedule.csv");
        std::cout << "wrote " << out_prefix << "_{perturbed,reference,drift}.csv\n";
    }
    return 0;
}

int cmd_analyze(const CommonOptions& common, const std::string& in_path,
                const std::string& out_path) {
    sw::SimulationConfig hint = make_config(common);
    // Adopt the sidecar's recorded config when present.
    std::ifstream meta_in(in_path + ".meta.json");
    if (meta_in) {
        nlohmann::json meta;
        meta_in >> meta;
        if (meta.contains("config")) {
            const auto& c = meta["config"];
            hint.step = c.value("step", hint.step);
            hint.record_stride = c.value("record_stride", hint.record_stride);
            hint.transient_discard = c.value("transient_discard", hint.transient_discard);
            hint.rem_threshold = c.value("rem_threshold", hint.rem_threshold);
            hint.t_start = c.value("t_start", hint.t_start);
        }
    }
    const sw::Trajectory traj = sw::read_trajectory_csv(in_path, hint);
    const sw::BoutReport report = sw::analyze_trajectory(traj);
    print_bout_summary(std::cout, "analyze", report);
    if (!out_path.empty()) {
        nlohmann::json j;
        j["format_version"] = sw::kFormatVersion;
        j["mean_period"] = report.mean_period;
        j["period_cv"] = report.period_cv;
        j["wake_fraction"] = report.wake_fraction;
        j["rem_counts"] = report.rem_counts;
        j["cycles"] = report.periods.size();
        write_report_json(j, out_path);
        std::cout << "wrote " << out_path << "\n";
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"sleep/wake cycle simulation and analysis toolkit"};
    app.require_subcommand(1);

    CommonOptions common;
    app.add_option("--params", common.params_path, "parameter file (key = value)");

    auto add_sim_options = [&common](CLI::App* sub) {
        sub->add_option("--hours", common.hours, "simulation length in hours");
        sub->add_option("--step", common.step, "integration step in hours");
        sub->add_option("--discard", common.discard, "transient discard in hours");
        sub->add_option("--stride", common.stride, "record every Nth step");
        sub->add_option("--rem-threshold", common.rem_threshold,
                        "REM amplitude threshold");
    };

    // simulate
    auto* sim = app.add_subcommand("simulate", "integrate the model and write a CSV");
    std::string sim_out = "run.csv", sim_schedule, sim_plot;
    add_sim_options(sim);
    sim->add_option("--out", sim_out, "output trajectory CSV");
    sim->add_option("--schedule", sim_schedule, "perturbation schedule CSV");
    sim->add_option("--plot", sim_plot, "also emit plot data (timeseries|phase_plane|rem)");

    // stability
    auto* stab = app.add_subcommand("stability", "fixed point and eigenvalue report");
    double stab_eps = 0.3;
    stab->add_option("--epsilon", stab_eps, "epsilon value");

    // sweep
    auto* sweep = app.add_subcommand("sweep", "epsilon stability sweep");
    double sweep_lo = 0.25, sweep_hi = 0.40, sweep_res = 0.005;
    std::string sweep_out;
    bool sweep_serial = false;
    sweep->add_option("--lo", sweep_lo, "lower epsilon");
    sweep->add_option("--hi", sweep_hi, "upper epsilon");
    sweep->add_option("--resolution", sweep_res, "grid spacing");
    sweep->add_option("--out", sweep_out, "window report JSON");
    sweep->add_flag("--serial", sweep_serial, "use the serial reference path");

    // search
    auto* search = app.add_subcommand("search", "eigenvalue-constrained coefficient search");
    uint64_t search_seed = 20250801;
    int search_iters = 20000;
    std::string search_out;
    bool search_serial = false;
    search->add_option("--seed", search_seed, "random seed");
    search->add_option("--max-iters", search_iters, "candidate budget");
    search->add_option("--out", search_out, "accepted parameter file");
    search->add_flag("--serial", search_serial, "use the serial reference path");

    // knockout
    auto* ko = app.add_subcommand("knockout", "orexin knockout comparison");
    double ko_factor = 0.2;
    std::string ko_out;
    add_sim_options(ko);
    ko->add_option("--factor", ko_factor, "production scaling factor in [0, 1]");
    ko->add_option("--out", ko_out, "comparison report JSON");

    // replay
    auto* replay = app.add_subcommand("replay", "forced wake/sleep schedule replay");
    std::string replay_schedule_path, replay_out = "replay";
    uint64_t replay_seed = 20250801;
    bool replay_sample = false;
    add_sim_options(replay);
    replay->add_option("--schedule", replay_schedule_path, "schedule CSV");
    replay->add_flag("--sample", replay_sample, "use the bundled synthetic schedule");
    replay->add_option("--sample-seed", replay_seed, "seed for --sample");
    replay->add_option("--out-prefix", replay_out, "output file prefix");

    // analyze
    auto* analyze = app.add_subcommand("analyze", "recompute reports from a trajectory CSV");
    std::string analyze_in, analyze_out;
    add_sim_options(analyze);
    analyze->add_option("--in", analyze_in, "trajectory CSV")->required();
    analyze->add_option("--out", analyze_out, "report JSON");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);  // --help
        app.exit(e);
        return 2;
    }

    const std::string command_line = join_args(argc, argv);
    try {
        if (sim->parsed()) {
            return cmd_simulate(common, sim_out, sim_schedule, sim_plot, command_line);
        }
        if (stab->parsed()) return cmd_stability(common, stab_eps);
        if (sweep->parsed()) {
            return cmd_sweep(common, sweep_lo, sweep_hi, sweep_res, sweep_out,
                             sweep_serial);
        }
        if (search->parsed()) {
            return cmd_search(common, search_seed, search_iters, search_out,
                              search_serial);
        }
        if (ko->parsed()) return cmd_knockout(common, ko_factor, ko_out);
        if (replay->parsed()) {
            if (!replay_sample && replay_schedule_path.empty()) {
                std::cerr << "replay requires --schedule or --sample\n";
                return 2;
            }
            return cmd_replay(common, replay_schedule_path, replay_seed,
                              replay_sample, replay_out, command_line);
        }
        if (analyze->parsed()) return cmd_analyze(common, analyze_in, analyze_out);
    } catch (const sw::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 2;
}
