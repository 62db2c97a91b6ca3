#pragma once

#include <string>
#include <vector>

#include "sleepwake/experiments.hpp"
#include "sleepwake/integrator.hpp"

namespace sleepwake {

constexpr int kFormatVersion = 1;

/// Parses a schedule CSV: header `t_hours,event,factor`, '#' comments, times
/// non-decreasing, factor required for knockout_on rows. Reports the line of
/// any violation.
PerturbationSchedule parse_schedule(const std::string& path);

void write_schedule(const PerturbationSchedule& schedule, const std::string& path);

/// Writes one row per retained sample with shortest round-trip decimals.
/// Header: t_hours,GABA_BFw,GABA_BFs,OX,H,ACh_BF,ACh_LDTPPT,NA,S,DA,AD,
/// GABA_VLPO,R,V,state,marker.
void write_trajectory_csv(const Trajectory& trajectory, const std::string& path);

/// Re-reads a trajectory CSV. Config fields that do not live in the CSV
/// (step, stride, discard, threshold) are taken from `config_hint`.
Trajectory read_trajectory_csv(const std::string& path,
                               const SimulationConfig& config_hint);

enum class PlotKind { Timeseries, PhasePlane, Rem, Drift };

PlotKind plot_kind_from_string(const std::string& name);
std::string to_string(PlotKind kind);

/// Writes `<path>` as plot data plus `<path>.py`, a self-contained script
/// that renders it. Trajectory kinds: timeseries (AD/GABA_VLPO), phase_plane
/// (GABA_VLPO vs AD), rem (R trace).
void emit_plot_data(const Trajectory& trajectory, PlotKind kind,
                    const std::string& path);

/// Drift kind: per-cycle phase offsets.
void emit_plot_data(const DriftReport& report, PlotKind kind,
                    const std::string& path);

/// Reproducibility sidecar: resolved config, parameter fingerprint, events,
/// warnings and the run timestamp (timestamps live only here).
void write_metadata_sidecar(const Trajectory& trajectory,
                            const std::string& command_line,
                            const std::string& path);

/// Shortest decimal form that parses back to the identical double.
std::string format_double(double value);

}  // namespace sleepwake
