#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "sleepwake/integrator.hpp"

namespace sleepwake {

struct TransitionEvent {
    double time = 0.0;  // crossing time, linearly interpolated
    TransitionMarker kind = TransitionMarker::WakeInitialization;
    double crossing_value = 0.0;  // ad (= gaba_vlpo) at the crossing
};

struct TransitionScan {
    std::vector<TransitionEvent> events;
    std::vector<std::string> diagnostics;  // NoTransitions note, dropped repeats
};

/// Scans post-transient samples for sign changes of (ad - gaba_vlpo) and
/// refines each crossing by linear interpolation. Kinds strictly alternate;
/// same-kind repeats within one sample spacing are dropped and logged.
TransitionScan detect_transitions(const Trajectory& trajectory);

struct PeriodStatistics {
    std::vector<double> periods;  // consecutive wake-initialization gaps
    double mean = 0.0;
    double stddev = 0.0;
    double cv = 0.0;
};

/// Periods between consecutive WakeInitialization events. Throws
/// InsufficientEventsError with fewer than two wake initializations.
PeriodStatistics estimate_periods(const std::vector<TransitionEvent>& events);

struct Bout {
    double start = 0.0;
    double end = 0.0;
    double duration() const { return end - start; }
};

struct BoutReport {
    std::vector<Bout> wake_bouts;
    std::vector<Bout> sleep_bouts;
    std::vector<double> periods;           // wake-init to wake-init
    std::vector<int> rem_counts;           // per sleep bout, when computed
    double wake_fraction = 0.0;            // total wake / (wake + sleep)
    double mean_period = 0.0;
    double period_stddev = 0.0;
    double period_cv = 0.0;
};

/// Pairs alternating events into wake and sleep bouts; a trailing incomplete
/// bout is discarded.
BoutReport bout_durations(const std::vector<TransitionEvent>& events,
                          double trajectory_end);

/// Counts REM oscillations inside [start, end]: local maxima of r(t) above
/// `threshold`, debounced to at least 0.5 h apart.
int count_rem_bouts(const Trajectory& trajectory, double start, double end,
                    double threshold);

struct DriftReport {
    std::vector<double> offsets;       // hours, reduced to (-P/2, P/2]
    std::vector<double> event_times;   // perturbed wake-init times
    double reference_period = 0.0;
    bool recovered = false;            // last three offsets within 0.5 h
    double final_offset = 0.0;
};

/// Phase offsets of perturbed wake initializations against a reference run,
/// using nearest-event pairing modulo the reference period. Only events at or
/// after `after_time` are paired.
DriftReport phase_drift(const std::vector<TransitionEvent>& perturbed,
                        const std::vector<TransitionEvent>& reference,
                        double after_time = 0.0);

/// Full bout/period/REM analysis of one trajectory.
BoutReport analyze_trajectory(const Trajectory& trajectory);

struct KnockoutComparison {
    BoutReport baseline;
    BoutReport knockout;
    double period_change_rel = 0.0;  // |mean_ko - mean_base| / mean_base
    double mean_ox_baseline = 0.0;   // post-transient average
    double mean_ox_knockout = 0.0;
};

/// Runs the baseline and orexin-knockout simulations with identical config
/// and initial state and compares their bout structure.
KnockoutComparison run_orexin_knockout(const ModelParameters& params,
                                       const SimulationConfig& config,
                                       const StateVector& initial, double factor);

struct ReplayResult {
    Trajectory perturbed;
    Trajectory reference;
    BoutReport bouts;                 // of the perturbed run
    BoutReport reference_bouts;
    DriftReport drift;
    double extended_t_end = 0.0;
    std::vector<double> post_schedule_periods;
    double post_schedule_period_cv = 0.0;
};

/// Runs a perturbation schedule plus an unperturbed reference from the same
/// initial state, extending both runs at least five reference periods past the
/// final event, and reports bout structure and phase drift.
ReplayResult replay_schedule(const PerturbationSchedule& schedule,
                             const ModelParameters& params,
                             const SimulationConfig& config,
                             const StateVector& initial);

/// Seeded synthetic sleep-camp schedule: roughly `events_per_day` forced
/// wake/sleep perturbations per day over `days` days, mixing delayed onsets,
/// prolonged bouts and forced wakes.
PerturbationSchedule make_sleep_camp_schedule(uint64_t seed = 20250801,
                                              int days = 10,
                                              int events_per_day = 5);

}  // namespace sleepwake
