#include "sleepwake/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "sleepwake/errors.hpp"

namespace sleepwake {

TransitionScan detect_transitions(const Trajectory& traj) {
    TransitionScan scan;
    if (traj.size() < 2) {
        scan.diagnostics.push_back("NoTransitions: trajectory has fewer than 2 samples");
        return scan;
    }
    const double t_min = traj.config.t_start + traj.config.transient_discard;
    const double sample_spacing =
        traj.config.step * static_cast<double>(traj.config.record_stride);

    double prev_diff = 0.0;
    bool have_prev = false;
    double prev_time = 0.0;
    size_t prev_index = 0;
    for (size_t i = 0; i < traj.size(); ++i) {
        if (traj.times[i] < t_min) continue;
        const double diff = traj.states[i].ad - traj.states[i].gaba_vlpo;
        if (have_prev && ((prev_diff < 0.0 && diff >= 0.0) ||
                          (prev_diff > 0.0 && diff <= 0.0))) {
            const double denom = diff - prev_diff;
            const double frac = denom != 0.0 ? -prev_diff / denom : 0.0;
            TransitionEvent ev;
            ev.time = prev_time + frac * (traj.times[i] - prev_time);
            ev.kind = prev_diff < 0.0 ? TransitionMarker::WakeInitialization
                                      : TransitionMarker::SleepInitialization;
            const auto& a = traj.states[prev_index];
            const auto& b = traj.states[i];
            ev.crossing_value = a.ad + frac * (b.ad - a.ad);
            if (!scan.events.empty() && scan.events.back().kind == ev.kind &&
                ev.time - scan.events.back().time <= sample_spacing) {
                scan.diagnostics.push_back(
                    "dropped same-kind repeat at t=" + std::to_string(ev.time));
            } else {
                scan.events.push_back(ev);
            }
        }
        if (diff != 0.0) {
            prev_diff = diff;
            have_prev = true;
            prev_time = traj.times[i];
            prev_index = i;
        }
    }
    if (scan.events.empty()) {
        scan.diagnostics.push_back("NoTransitions: ad - gaba_vlpo never changes sign");
    }
    return scan;
}

PeriodStatistics estimate_periods(const std::vector<TransitionEvent>& events) {
    std::vector<double> wake_times;
    for (const auto& ev : events) {
        if (ev.kind == TransitionMarker::WakeInitialization) {
            wake_times.push_back(ev.time);
        }
    }
    if (wake_times.size() < 2) {
        throw InsufficientEventsError("need >= 2 wake initializations, have " +
                                      std::to_string(wake_times.size()));
    }
    PeriodStatistics stats;
    for (size_t i = 1; i < wake_times.size(); ++i) {
        stats.periods.push_back(wake_times[i] - wake_times[i - 1]);
    }
    double sum = 0.0;
    for (double p : stats.periods) sum += p;
    stats.mean = sum / static_cast<double>(stats.periods.size());
    double ss = 0.0;
    for (double p : stats.periods) ss += (p - stats.mean) * (p - stats.mean);
    stats.stddev = std::sqrt(ss / static_cast<double>(stats.periods.size()));
    stats.cv = stats.mean != 0.0 ? stats.stddev / stats.mean : 0.0;
    return stats;
}

BoutReport bout_durations(const std::vector<TransitionEvent>& events,
                          double trajectory_end) {
    BoutReport report;
    (void)trajectory_end;  // trailing incomplete bouts are discarded anyway
    for (size_t i = 0; i + 1 < events.size(); ++i) {
        const auto& a = events[i];
        const auto& b = events[i + 1];
        if (a.kind == b.kind) continue;
        if (a.kind == TransitionMarker::WakeInitialization) {
            report.wake_bouts.push_back({a.time, b.time});
        } else {
            report.sleep_bouts.push_back({a.time, b.time});
        }
    }
    double wake_total = 0.0, sleep_total = 0.0;
    for (const auto& bout : report.wake_bouts) wake_total += bout.duration();
    for (const auto& bout : report.sleep_bouts) sleep_total += bout.duration();
    if (wake_total + sleep_total > 0.0) {
        report.wake_fraction = wake_total / (wake_total + sleep_total);
    }
    try {
        const PeriodStatistics stats = estimate_periods(events);
        report.periods = stats.periods;
        report.mean_period = stats.mean;
        report.period_stddev = stats.stddev;
        report.period_cv = stats.cv;
    } catch (const InsufficientEventsError&) {
    }
    return report;
}

int count_rem_bouts(const Trajectory& traj, double start, double end,
                    double threshold) {
    // One REM oscillation contributes one signed peak of r; counting |r|
    // maxima would double-count each swing.
    constexpr double kDebounceHours = 0.5;
    int count = 0;
    double last_max_time = -1e300;
    for (size_t i = 1; i + 1 < traj.size(); ++i) {
        const double t = traj.times[i];
        if (t < start || t > end) continue;
        const double prev = traj.states[i - 1].r;
        const double cur = traj.states[i].r;
        const double next = traj.states[i + 1].r;
        if (cur > threshold && cur >= prev && cur >= next &&
            t - last_max_time >= kDebounceHours) {
            ++count;
            last_max_time = t;
        }
    }
    return count;
}

DriftReport phase_drift(const std::vector<TransitionEvent>& perturbed,
                        const std::vector<TransitionEvent>& reference,
                        double after_time) {
    std::vector<double> pert_times, ref_times;
    for (const auto& ev : perturbed) {
        if (ev.kind == TransitionMarker::WakeInitialization && ev.time >= after_time) {
            pert_times.push_back(ev.time);
        }
    }
    for (const auto& ev : reference) {
        if (ev.kind == TransitionMarker::WakeInitialization) {
            ref_times.push_back(ev.time);
        }
    }
    if (pert_times.size() < 3 || ref_times.size() < 3) {
        throw InsufficientEventsError(
            "phase drift needs >= 3 wake initializations in both runs");
    }

    const PeriodStatistics ref_stats = estimate_periods(reference);
    const double period = ref_stats.mean;

    DriftReport report;
    report.reference_period = period;
    for (double tp : pert_times) {
        // Nearest reference event, then reduce the gap modulo the period.
        double best = ref_times.front();
        for (double tr : ref_times) {
            if (std::abs(tr - tp) < std::abs(best - tp)) best = tr;
        }
        double offset = std::remainder(tp - best, period);
        if (offset <= -period / 2.0) offset += period;  // fold to (-P/2, P/2]
        report.offsets.push_back(offset);
        report.event_times.push_back(tp);
    }
    const size_t n = report.offsets.size();
    if (n >= 3) {
        const double a = report.offsets[n - 3];
        const double b = report.offsets[n - 2];
        const double c = report.offsets[n - 1];
        const double lo = std::min({a, b, c});
        const double hi = std::max({a, b, c});
        report.recovered = hi - lo <= 0.5;
    }
    report.final_offset = report.offsets.back();
    return report;
}

BoutReport analyze_trajectory(const Trajectory& traj) {
    const TransitionScan scan = detect_transitions(traj);
    BoutReport report = bout_durations(scan.events, traj.final_time());
    for (const auto& bout : report.sleep_bouts) {
        report.rem_counts.push_back(
            count_rem_bouts(traj, bout.start, bout.end, traj.config.rem_threshold));
    }
    return report;
}

namespace {

double post_transient_mean_ox(const Trajectory& traj) {
    double sum = 0.0;
    long n = 0;
    for (size_t i = 0; i < traj.size(); ++i) {
        if (traj.transient[i]) continue;
        sum += traj.states[i].ox;
        ++n;
    }
    return n > 0 ? sum / static_cast<double>(n) : 0.0;
}

}  // namespace

KnockoutComparison run_orexin_knockout(const ModelParameters& params,
                                       const SimulationConfig& config,
                                       const StateVector& initial, double factor) {
    const ModelParameters ko = apply_orexin_knockout(params, factor);

    const Trajectory base_traj = simulate(params, config, initial);
    const Trajectory ko_traj = simulate(ko, config, initial);

    KnockoutComparison cmp;
    cmp.baseline = analyze_trajectory(base_traj);
    cmp.knockout = analyze_trajectory(ko_traj);
    if (cmp.baseline.mean_period > 0.0) {
        cmp.period_change_rel =
            std::abs(cmp.knockout.mean_period - cmp.baseline.mean_period) /
            cmp.baseline.mean_period;
    }
    cmp.mean_ox_baseline = post_transient_mean_ox(base_traj);
    cmp.mean_ox_knockout = post_transient_mean_ox(ko_traj);
    return cmp;
}

ReplayResult replay_schedule(const PerturbationSchedule& schedule,
                             const ModelParameters& params,
                             const SimulationConfig& config,
                             const StateVector& initial) {
    ReplayResult result;

    // Reference pass over the configured window fixes the nominal period.
    SimulationConfig ref_cfg = config;
    Trajectory reference = simulate(params, ref_cfg, initial);
    TransitionScan ref_scan = detect_transitions(reference);
    const PeriodStatistics ref_stats = estimate_periods(ref_scan.events);

    double last_event = config.t_start;
    for (const auto& ev : schedule) last_event = std::max(last_event, ev.time);
    // Seven reference periods past the final event leave at least five whole
    // measurable cycles after the last perturbation settles.
    const double needed_end = last_event + 7.0 * ref_stats.mean;
    result.extended_t_end = std::max(config.t_end, needed_end);

    SimulationConfig run_cfg = config;
    run_cfg.t_end = result.extended_t_end;
    if (run_cfg.t_end > config.t_end) {
        reference = simulate(params, run_cfg, initial);
        ref_scan = detect_transitions(reference);
    }
    Trajectory perturbed = simulate(params, run_cfg, initial, schedule);
    TransitionScan pert_scan = detect_transitions(perturbed);

    result.bouts = analyze_trajectory(perturbed);
    result.reference_bouts = analyze_trajectory(reference);
    result.drift = phase_drift(pert_scan.events, ref_scan.events, last_event);

    // Period statistics restricted to cycles after the final event.
    std::vector<double> post_wake;
    for (const auto& ev : pert_scan.events) {
        if (ev.kind == TransitionMarker::WakeInitialization && ev.time >= last_event) {
            post_wake.push_back(ev.time);
        }
    }
    for (size_t i = 1; i < post_wake.size(); ++i) {
        result.post_schedule_periods.push_back(post_wake[i] - post_wake[i - 1]);
    }
    if (result.post_schedule_periods.size() >= 2) {
        double sum = 0.0;
        for (double p : result.post_schedule_periods) sum += p;
        const double mean = sum / static_cast<double>(result.post_schedule_periods.size());
        double ss = 0.0;
        for (double p : result.post_schedule_periods) ss += (p - mean) * (p - mean);
        const double sd =
            std::sqrt(ss / static_cast<double>(result.post_schedule_periods.size()));
        result.post_schedule_period_cv = mean != 0.0 ? sd / mean : 0.0;
    }

    result.perturbed = std::move(perturbed);
    result.reference = std::move(reference);
    return result;
}

PerturbationSchedule make_sleep_camp_schedule(uint64_t seed, int days,
                                              int events_per_day) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> jitter(0.0, 1.0);

    PerturbationSchedule schedule;
    for (int day = 0; day < days; ++day) {
        const double day_start = 24.0 * static_cast<double>(day);
        for (int k = 0; k < events_per_day; ++k) {
            // Events spread through the day with jitter; kinds alternate with
            // occasional repeats, mixing delayed onsets with forced wakes.
            const double slot = 24.0 * (static_cast<double>(k) + jitter(rng)) /
                                static_cast<double>(events_per_day);
            PerturbationEvent ev;
            ev.time = day_start + slot;
            const double u = jitter(rng);
            ev.kind = u < 0.55 ? EventKind::ForceWake : EventKind::ForceSleep;
            schedule.push_back(ev);
        }
    }
    std::sort(schedule.begin(), schedule.end(),
              [](const auto& a, const auto& b) { return a.time < b.time; });
    // Enforce a minimum one-hour gap so consecutive forcings stay distinct.
    PerturbationSchedule spaced;
    for (const auto& ev : schedule) {
        if (spaced.empty() || ev.time - spaced.back().time >= 1.0) {
            spaced.push_back(ev);
        }
    }
    return spaced;
}

}  // namespace sleepwake
