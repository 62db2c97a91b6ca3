#include "sleepwake/integrator.hpp"

#include <algorithm>
#include <cmath>

#include "sleepwake/errors.hpp"
#include "sleepwake/params.hpp"

namespace sleepwake {

namespace detail {

[[noreturn]] void throw_non_finite(double t, const std::array<double, kNumVars>& v) {
    for (int i = 0; i < kNumVars; ++i) {
        if (!std::isfinite(v[static_cast<size_t>(i)])) {
            throw NonFiniteStateError(t, i, variable_names()[static_cast<size_t>(i)]);
        }
    }
    throw NonFiniteStateError(t, -1, "unknown");
}

}  // namespace detail

std::string to_string(EventKind kind) {
    switch (kind) {
        case EventKind::ForceWake: return "force_wake";
        case EventKind::ForceSleep: return "force_sleep";
        case EventKind::KnockoutOn: return "knockout_on";
        case EventKind::KnockoutOff: return "knockout_off";
    }
    return "?";
}

namespace {

void validate_config(const SimulationConfig& c) {
    if (!(c.step > 0.0)) throw Error("step must be positive");
    if (!(c.t_end >= c.t_start)) throw Error("t_end must not precede t_start");
    if (c.record_stride < 1) throw Error("record_stride must be >= 1");
    if (c.transient_discard < 0.0 ||
        (c.t_end > c.t_start && c.transient_discard >= c.t_end - c.t_start)) {
        throw Error("transient_discard must lie in [0, t_end - t_start)");
    }
    if (!(c.rem_threshold > 0.0)) throw Error("rem_threshold must be positive");
    if (c.rem_floor < 0.0) throw Error("rem_floor must be non-negative");
}

void validate_schedule(const PerturbationSchedule& schedule,
                       const SimulationConfig& c) {
    for (size_t i = 0; i < schedule.size(); ++i) {
        const auto& ev = schedule[i];
        if (ev.time < c.t_start || ev.time > c.t_end) {
            throw ScheduleOutOfRangeError(
                "event at t=" + std::to_string(ev.time) + " outside [" +
                std::to_string(c.t_start) + ", " + std::to_string(c.t_end) + "]");
        }
        if (i > 0 && schedule[i - 1].time > ev.time) {
            throw Error("schedule not sorted by time");
        }
        if (i > 0 && schedule[i - 1].time == ev.time &&
            schedule[i - 1].kind == ev.kind) {
            throw Error("duplicate event (time, kind) in schedule");
        }
        if ((ev.kind == EventKind::KnockoutOn) &&
            !(ev.factor >= 0.0 && ev.factor <= 1.0)) {
            throw Error("knockout factor must lie in [0, 1]");
        }
    }
}

// Envelope used by the dormancy guard; v is scaled by the oscillation
// frequency so the measure is amplitude-like throughout the phase.
double rem_envelope(const StateVector& s, const ModelParameters& p) {
    return std::hypot(s.r, s.v / std::sqrt(p.gamma));
}

struct RecordingContext {
    Trajectory* traj;
    const ModelParameters* base_params;
    const SimulationConfig* config;
    double prev_recorded_diff = 0.0;
    bool have_prev = false;
};

void record_sample(RecordingContext& ctx, double t, const StateVector& state,
                   const ModelParameters& active) {
    const std::array<double, kNumVars> d = full_rhs(state, active);
    BehavioralState b = classify_state(state, d, ctx.config->rem_threshold);
    const double diff = state.ad - state.gaba_vlpo;
    if (ctx.have_prev && !b.marker.has_value()) {
        // Attach transition markers at recorded sign changes of ad - gaba.
        if (ctx.prev_recorded_diff < 0.0 && diff > 0.0) {
            b.marker = TransitionMarker::WakeInitialization;
            if (!(d[kAd] > 0.0 && d[kGabaVlpo] < 0.0)) {
                ctx.traj->warnings["ambiguous_transition"]++;
            }
        } else if (ctx.prev_recorded_diff > 0.0 && diff < 0.0) {
            b.marker = TransitionMarker::SleepInitialization;
            if (!(d[kAd] < 0.0 && d[kGabaVlpo] > 0.0)) {
                ctx.traj->warnings["ambiguous_transition"]++;
            }
        }
    }
    if (diff != 0.0) {
        ctx.prev_recorded_diff = diff;
        ctx.have_prev = true;
    }

    ctx.traj->times.push_back(t);
    ctx.traj->states.push_back(state);
    ctx.traj->behavior.push_back(b);
    ctx.traj->transient.push_back(t <
                                  ctx.config->t_start + ctx.config->transient_discard);
}

Trajectory run(const ModelParameters& params, const SimulationConfig& config,
               const StateVector& initial, const PerturbationSchedule& schedule) {
    validate_config(config);
    validate_schedule(schedule, config);
    if (!initial.all_finite()) {
        throw NonFiniteStateError(config.t_start, -1, "initial state");
    }

    const double h = config.step;
    const long n_steps =
        static_cast<long>(std::llround((config.t_end - config.t_start) / h));

    // Snap each event to its nearest step index; events on the same index
    // apply in schedule order before that step departs.
    std::vector<std::pair<long, PerturbationEvent>> snapped;
    snapped.reserve(schedule.size());
    for (const auto& ev : schedule) {
        long idx = std::llround((ev.time - config.t_start) / h);
        idx = std::clamp(idx, 0L, n_steps);
        snapped.emplace_back(idx, ev);
    }
    std::stable_sort(snapped.begin(), snapped.end(),
                     [](const auto& a, const auto& b) { return a.first < b.first; });

    Trajectory traj;
    traj.config = config;
    traj.params_fingerprint = parameter_fingerprint(params);
    traj.events = schedule;
    traj.times.reserve(static_cast<size_t>(n_steps / config.record_stride + 2));

    ModelParameters active = params;
    StateVector state = initial;
    RecordingContext ctx{&traj, &params, &config};

    std::array<bool, kNumVars> warned{};
    auto note_negative = [&](const StateVector& s) {
        if (!config.clamp_warnings) return;
        const auto a = s.to_array();
        for (int i = 0; i < kNumConcentrations; ++i) {
            if (a[static_cast<size_t>(i)] < -1e-3 && !warned[static_cast<size_t>(i)]) {
                warned[static_cast<size_t>(i)] = true;
                traj.warnings[variable_names()[static_cast<size_t>(i)]]++;
            }
        }
    };

    size_t next_event = 0;
    auto apply_events_at = [&](long step_index) {
        while (next_event < snapped.size() && snapped[next_event].first == step_index) {
            const PerturbationEvent& ev = snapped[next_event].second;
            switch (ev.kind) {
                case EventKind::ForceWake: state.ad = active.ad_max; break;
                case EventKind::ForceSleep: state.ad = active.ad_min; break;
                case EventKind::KnockoutOn:
                    active = apply_orexin_knockout(params, ev.factor);
                    break;
                case EventKind::KnockoutOff: active = params; break;
            }
            ++next_event;
        }
    };

    const StateVector pre_event_initial = state;
    apply_events_at(0);
    record_sample(ctx, config.t_start, state, active);
    note_negative(state);

    auto rhs = [&active](const StateVector& s) { return full_rhs(s, active); };

    // Crossing sign for the dormancy guard is tracked before events apply, so
    // a forced wake that flips ad - gaba also switches the REM oscillation off
    // (one step later, keeping the event sample itself untouched beyond ad).
    double prev_diff = pre_event_initial.ad - pre_event_initial.gaba_vlpo;

    for (long i = 0; i < n_steps; ++i) {
        const double t = config.t_start + static_cast<double>(i) * h;
        state = rk4_step(rhs, state, t, h);

        // Dormancy guard: wake onset switches the REM oscillation off; the
        // envelope floor keeps a remnant the next sleep bout can grow from.
        if (config.rem_wake_shutdown && prev_diff < 0.0 &&
            state.ad - state.gaba_vlpo >= 0.0) {
            state.r = config.rem_floor;
            state.v = 0.0;
        }
        prev_diff = state.ad - state.gaba_vlpo;
        if (config.rem_floor > 0.0) {
            const double env = rem_envelope(state, active);
            if (env < config.rem_floor) {
                if (env > 0.0) {
                    const double scale = config.rem_floor / env;
                    state.r *= scale;
                    state.v *= scale;
                } else {
                    state.r = config.rem_floor;
                }
            }
        }
        note_negative(state);

        if ((i + 1) == n_steps) break;
        apply_events_at(i + 1);
        if ((i + 1) % config.record_stride == 0) {
            record_sample(ctx, config.t_start + static_cast<double>(i + 1) * h, state,
                          active);
        }
    }
    if (n_steps > 0) {
        apply_events_at(n_steps);
        record_sample(ctx, config.t_end, state, active);
    }
    return traj;
}

}  // namespace

Trajectory simulate(const ModelParameters& params, const SimulationConfig& config,
                    const StateVector& initial,
                    const PerturbationSchedule& schedule) {
    return run(params, config, initial, schedule);
}

Trajectory resume(const Trajectory& trajectory, const ModelParameters& params,
                  double additional, const PerturbationSchedule& schedule) {
    if (trajectory.size() == 0) throw Error("cannot resume an empty trajectory");
    if (additional < 0.0) throw Error("additional hours must be non-negative");
    if (additional == 0.0) return trajectory;

    SimulationConfig cfg = trajectory.config;
    const double t0 = trajectory.final_time();
    cfg.t_start = t0;
    cfg.t_end = t0 + additional;
    cfg.transient_discard = 0.0;

    Trajectory tail = run(params, cfg, trajectory.final_state(), schedule);

    Trajectory out = trajectory;
    // An event scheduled exactly at the junction time applies before the
    // first appended step; the junction sample reflects it, matching the
    // convention that an event's own sample shows the forced value.
    const bool event_at_junction =
        !schedule.empty() &&
        std::llround((schedule.front().time - t0) / cfg.step) == 0;
    if (event_at_junction) {
        out.states.back() = tail.states[0];
        out.behavior.back() = tail.behavior[0];
    }
    for (size_t i = 1; i < tail.size(); ++i) {
        out.times.push_back(tail.times[i]);
        out.states.push_back(tail.states[i]);
        out.behavior.push_back(tail.behavior[i]);
        out.transient.push_back(
            tail.times[i] < trajectory.config.t_start + trajectory.config.transient_discard);
    }
    for (const auto& ev : schedule) out.events.push_back(ev);
    for (const auto& [k, v] : tail.warnings) out.warnings[k] += v;
    out.config.t_end = cfg.t_end;
    return out;
}

}  // namespace sleepwake
