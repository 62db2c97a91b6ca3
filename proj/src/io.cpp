#include "sleepwake/io.hpp"

#include <charconv>
#include <chrono>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "sleepwake/errors.hpp"

namespace sleepwake {

namespace {

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> fields;
    std::string cur;
    for (char ch : line) {
        if (ch == ',') {
            fields.push_back(cur);
            cur.clear();
        } else if (ch != '\r') {
            cur += ch;
        }
    }
    fields.push_back(cur);
    return fields;
}

double parse_double_exact(const std::string& s, const std::string& path, int line) {
    double value = 0.0;
    const char* begin = s.data();
    const char* end = s.data() + s.size();
    const auto res = std::from_chars(begin, end, value);
    if (res.ec != std::errc() || res.ptr != end) {
        throw ParseError(path, line, "invalid number '" + s + "'");
    }
    return value;
}

const char* kTrajectoryHeader =
    "t_hours,GABA_BFw,GABA_BFs,OX,H,ACh_BF,ACh_LDTPPT,NA,S,DA,AD,GABA_VLPO,R,V,"
    "state,marker";

}  // namespace

std::string format_double(double value) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), value);
    return std::string(buf, res.ptr);
}

PerturbationSchedule parse_schedule(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open schedule file '" + path + "'");

    PerturbationSchedule schedule;
    std::string line;
    int lineno = 0;
    bool header_seen = false;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line[0] == '#') continue;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        if (!header_seen) {
            const auto fields = split_csv(line);
            if (fields.size() < 2 || fields[0] != "t_hours" || fields[1] != "event") {
                throw ParseError(path, lineno,
                                 "expected header 't_hours,event,factor'");
            }
            header_seen = true;
            continue;
        }
        const auto fields = split_csv(line);
        if (fields.size() < 2 || fields.size() > 3) {
            throw ParseError(path, lineno, "expected 2 or 3 fields");
        }
        PerturbationEvent ev;
        ev.time = parse_double_exact(fields[0], path, lineno);
        const std::string& kind = fields[1];
        if (kind == "force_wake") ev.kind = EventKind::ForceWake;
        else if (kind == "force_sleep") ev.kind = EventKind::ForceSleep;
        else if (kind == "knockout_on") ev.kind = EventKind::KnockoutOn;
        else if (kind == "knockout_off") ev.kind = EventKind::KnockoutOff;
        else throw ParseError(path, lineno, "unknown event kind '" + kind + "'");

        const bool has_factor = fields.size() == 3 && !fields[2].empty();
        if (ev.kind == EventKind::KnockoutOn) {
            if (!has_factor) {
                throw ValidationError(path, lineno, "knockout_on requires a factor");
            }
            ev.factor = parse_double_exact(fields[2], path, lineno);
            if (!(ev.factor >= 0.0 && ev.factor <= 1.0)) {
                throw ValidationError(path, lineno, "factor must lie in [0, 1]");
            }
        } else if (has_factor) {
            throw ValidationError(path, lineno,
                                  "factor is only valid on knockout_on rows");
        }
        if (!schedule.empty() && ev.time < schedule.back().time) {
            throw ValidationError(path, lineno, "event times must be non-decreasing");
        }
        schedule.push_back(ev);
    }
    if (!header_seen) throw ParseError(path, lineno, "missing header row");
    return schedule;
}

void write_schedule(const PerturbationSchedule& schedule, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write schedule file '" + path + "'");
    out << "# sleepwake schedule, format_version " << kFormatVersion << "\n";
    out << "t_hours,event,factor\n";
    for (const auto& ev : schedule) {
        out << format_double(ev.time) << ',' << to_string(ev.kind) << ',';
        if (ev.kind == EventKind::KnockoutOn) out << format_double(ev.factor);
        out << '\n';
    }
    if (!out) throw IoError("failed writing schedule '" + path + "'");
}

void write_trajectory_csv(const Trajectory& traj, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write trajectory file '" + path + "'");
    out << kTrajectoryHeader << '\n';
    for (size_t i = 0; i < traj.size(); ++i) {
        out << format_double(traj.times[i]);
        for (double x : traj.states[i].to_array()) {
            out << ',' << format_double(x);
        }
        out << ',' << to_string(traj.behavior[i].phase) << ',';
        if (traj.behavior[i].marker.has_value()) {
            out << to_string(*traj.behavior[i].marker);
        } else {
            out << '-';
        }
        out << '\n';
    }
    if (!out) throw IoError("failed writing trajectory '" + path + "'");
}

Trajectory read_trajectory_csv(const std::string& path,
                               const SimulationConfig& config_hint) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open trajectory file '" + path + "'");

    Trajectory traj;
    traj.config = config_hint;
    std::string line;
    int lineno = 0;
    bool header_seen = false;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line[0] == '#') continue;
        if (!header_seen) {
            std::string expect(kTrajectoryHeader);
            std::string got = line;
            if (!got.empty() && got.back() == '\r') got.pop_back();
            if (got != expect) {
                throw ParseError(path, lineno, "unexpected trajectory header");
            }
            header_seen = true;
            continue;
        }
        const auto fields = split_csv(line);
        if (fields.size() != 16) {
            throw ParseError(path, lineno, "expected 16 fields, got " +
                                               std::to_string(fields.size()));
        }
        traj.times.push_back(parse_double_exact(fields[0], path, lineno));
        std::array<double, kNumVars> a{};
        for (int k = 0; k < kNumVars; ++k) {
            a[static_cast<size_t>(k)] = parse_double_exact(fields[static_cast<size_t>(k + 1)], path, lineno);
        }
        traj.states.push_back(StateVector::from_array(a));
        BehavioralState b;
        const std::string& phase = fields[14];
        if (phase == "wake") b.phase = BehavioralPhase::Wake;
        else if (phase == "nrem") b.phase = BehavioralPhase::SleepNREM;
        else if (phase == "rem") b.phase = BehavioralPhase::SleepREM;
        else throw ParseError(path, lineno, "unknown state '" + phase + "'");
        const std::string& marker = fields[15];
        if (marker == "wake_init") b.marker = TransitionMarker::WakeInitialization;
        else if (marker == "sleep_init") b.marker = TransitionMarker::SleepInitialization;
        else if (marker != "-") throw ParseError(path, lineno, "unknown marker '" + marker + "'");
        traj.behavior.push_back(b);
    }
    if (!header_seen) throw ParseError(path, lineno, "missing trajectory header");
    if (traj.times.empty()) throw ValidationError(path, lineno, "no samples");

    traj.config.t_start = traj.times.front();
    traj.config.t_end = traj.times.back();
    for (double t : traj.times) {
        traj.transient.push_back(t < traj.config.t_start + traj.config.transient_discard);
    }
    return traj;
}

PlotKind plot_kind_from_string(const std::string& name) {
    if (name == "timeseries") return PlotKind::Timeseries;
    if (name == "phase_plane") return PlotKind::PhasePlane;
    if (name == "rem") return PlotKind::Rem;
    if (name == "drift") return PlotKind::Drift;
    throw IncompatibleKindError("unknown plot kind '" + name + "'");
}

std::string to_string(PlotKind kind) {
    switch (kind) {
        case PlotKind::Timeseries: return "timeseries";
        case PlotKind::PhasePlane: return "phase_plane";
        case PlotKind::Rem: return "rem";
        case PlotKind::Drift: return "drift";
    }
    return "?";
}

namespace {

void write_plot_script(const std::string& data_path, PlotKind kind) {
    std::ofstream py(data_path + ".py");
    if (!py) throw IoError("cannot write plot script for '" + data_path + "'");
    py << "#!/usr/bin/env python3\n"
       << "# Renders " << data_path << " (" << to_string(kind) << ").\n"
       << "import csv\n"
       << "import matplotlib\n"
       << "matplotlib.use('Agg')\n"
       << "import matplotlib.pyplot as plt\n"
       << "rows = []\n"
       << "with open(" << nlohmann::json(data_path).dump() << ") as fh:\n"
       << "    for row in csv.reader(r for r in fh if not r.startswith('#')):\n"
       << "        rows.append(row)\n"
       << "header, data = rows[0], rows[1:]\n"
       << "cols = {name: [float(r[i]) for r in data] for i, name in enumerate(header)}\n"
       << "fig, ax = plt.subplots(figsize=(9, 4.5))\n";
    switch (kind) {
        case PlotKind::Timeseries:
            py << "ax.plot(cols['t_hours'], cols['AD'], label='AD')\n"
               << "ax.plot(cols['t_hours'], cols['GABA_VLPO'], label='GABA_VLPO')\n"
               << "ax.set_xlabel('hours'); ax.set_ylabel('level'); ax.legend()\n";
            break;
        case PlotKind::PhasePlane:
            py << "ax.plot(cols['GABA_VLPO'], cols['AD'])\n"
               << "ax.set_xlabel('GABA_VLPO'); ax.set_ylabel('AD')\n";
            break;
        case PlotKind::Rem:
            py << "ax.plot(cols['t_hours'], cols['R'])\n"
               << "ax.set_xlabel('hours'); ax.set_ylabel('R')\n";
            break;
        case PlotKind::Drift:
            py << "ax.plot(cols['cycle'], cols['offset_hours'], marker='o')\n"
               << "ax.set_xlabel('cycle'); ax.set_ylabel('phase offset (hours)')\n";
            break;
    }
    py << "fig.tight_layout()\n"
       << "fig.savefig(" << nlohmann::json(data_path + ".png").dump() << ", dpi=150)\n"
       << "print('wrote " << data_path << ".png')\n";
}

}  // namespace

void emit_plot_data(const Trajectory& traj, PlotKind kind, const std::string& path) {
    if (kind == PlotKind::Drift) {
        throw IncompatibleKindError("drift plots need a DriftReport, not a trajectory");
    }
    std::ofstream out(path);
    if (!out) throw IoError("cannot write plot data '" + path + "'");
    out << "# sleepwake plot data (" << to_string(kind) << "), format_version "
        << kFormatVersion << "\n";
    switch (kind) {
        case PlotKind::Timeseries:
            out << "t_hours,AD,GABA_VLPO\n";
            for (size_t i = 0; i < traj.size(); ++i) {
                out << format_double(traj.times[i]) << ','
                    << format_double(traj.states[i].ad) << ','
                    << format_double(traj.states[i].gaba_vlpo) << '\n';
            }
            break;
        case PlotKind::PhasePlane:
            out << "GABA_VLPO,AD\n";
            for (size_t i = 0; i < traj.size(); ++i) {
                out << format_double(traj.states[i].gaba_vlpo) << ','
                    << format_double(traj.states[i].ad) << '\n';
            }
            break;
        case PlotKind::Rem:
            out << "t_hours,R\n";
            for (size_t i = 0; i < traj.size(); ++i) {
                out << format_double(traj.times[i]) << ','
                    << format_double(traj.states[i].r) << '\n';
            }
            break;
        case PlotKind::Drift:
            break;
    }
    if (!out) throw IoError("failed writing plot data '" + path + "'");
    write_plot_script(path, kind);
}

void emit_plot_data(const DriftReport& report, PlotKind kind, const std::string& path) {
    if (kind != PlotKind::Drift) {
        throw IncompatibleKindError("DriftReport data only supports the drift kind");
    }
    std::ofstream out(path);
    if (!out) throw IoError("cannot write plot data '" + path + "'");
    out << "# sleepwake plot data (drift), format_version " << kFormatVersion << "\n";
    out << "cycle,offset_hours\n";
    for (size_t i = 0; i < report.offsets.size(); ++i) {
        out << i << ',' << format_double(report.offsets[i]) << '\n';
    }
    if (!out) throw IoError("failed writing plot data '" + path + "'");
    write_plot_script(path, kind);
}

void write_metadata_sidecar(const Trajectory& traj, const std::string& command_line,
                            const std::string& path) {
    nlohmann::json meta;
    meta["format_version"] = kFormatVersion;
    meta["command"] = command_line;
    meta["params_fingerprint"] = traj.params_fingerprint;
    meta["config"] = {
        {"t_start", traj.config.t_start},
        {"t_end", traj.config.t_end},
        {"step", traj.config.step},
        {"transient_discard", traj.config.transient_discard},
        {"record_stride", traj.config.record_stride},
        {"clamp_warnings", traj.config.clamp_warnings},
        {"rem_threshold", traj.config.rem_threshold},
        {"rem_floor", traj.config.rem_floor},
        {"rem_wake_shutdown", traj.config.rem_wake_shutdown},
    };
    meta["events"] = nlohmann::json::array();
    for (const auto& ev : traj.events) {
        nlohmann::json j = {{"time", ev.time}, {"kind", to_string(ev.kind)}};
        if (ev.kind == EventKind::KnockoutOn) j["factor"] = ev.factor;
        meta["events"].push_back(j);
    }
    meta["warnings"] = traj.warnings;
    const auto now = std::chrono::system_clock::now();
    meta["timestamp_unix"] =
        std::chrono::duration_cast<std::chrono::seconds>(now.time_since_epoch()).count();

    std::ofstream out(path);
    if (!out) throw IoError("cannot write metadata sidecar '" + path + "'");
    out << meta.dump(2) << '\n';
    if (!out) throw IoError("failed writing metadata sidecar '" + path + "'");
}

}  // namespace sleepwake
