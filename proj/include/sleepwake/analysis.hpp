#pragma once

#include <complex>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "sleepwake/model.hpp"

namespace sleepwake {

/// Slow-system fixed point with the max-norm of slow_rhs at the point.
struct FixedPoint {
    double gaba_vlpo = 0.0;
    double ad = 0.0;
    double residual = 0.0;
};

enum class StabilityClass {
    StableNode,
    StableSpiral,
    UnstableNode,
    UnstableSpiral,
    Center,
    Saddle,
    Mixed,
};

std::string to_string(StabilityClass c);

struct StabilityReport {
    FixedPoint fixed_point;
    Eigen::MatrixXd jacobian;
    std::vector<std::complex<double>> eigenvalues;
    StabilityClass classification = StabilityClass::Mixed;
    double epsilon_used = 0.0;
};

/// AD value on the adenosine nullcline: k1 / (k2 + g^2).
double ad_nullcline(double gaba_vlpo, const ModelParameters& p);

/// AD value on the printed form of the GABA nullcline:
/// (k3*g - epsilon) / (k4 + g^2).
double gaba_nullcline(double gaba_vlpo, const ModelParameters& p, double epsilon);

/// Finds the slow-system fixed point with gaba in [lo, hi] by bracketing the
/// vector-field zero along the AD nullcline and polishing with Newton steps.
/// `others` receives any additional real roots in the interval.
FixedPoint find_fixed_point(const ModelParameters& p, double epsilon, double lo,
                            double hi, std::vector<FixedPoint>* others = nullptr);

/// 2x2 Jacobian of the slow system at a point.
Eigen::Matrix2d jacobian_slow(const FixedPoint& point, const ModelParameters& p);

/// 11x11 Jacobian of the concentration dynamics at a state: the linear fast
/// block stacked on the slow-system partial derivatives (including the
/// epsilon feedback entries in the bottom row).
Eigen::MatrixXd jacobian_full(const StateVector& state, const ModelParameters& p);

/// All eigenvalues of a square matrix (<= 16x16), ordered by (real, imag).
/// Each eigenpair satisfies a relative residual bound of 1e-8.
std::vector<std::complex<double>> eigenvalues(const Eigen::MatrixXd& m);

/// Classification from a 2x2 trace/determinant/discriminant triple.
StabilityClass classify_2x2(double trace, double det);

/// Classification consistent with a general eigenvalue list.
StabilityClass classify_eigenvalues(const std::vector<std::complex<double>>& eigs);

/// Stability report of the slow system at its fixed point for a given epsilon.
StabilityReport stability_report_slow(const ModelParameters& p, double epsilon,
                                      double lo = 0.01, double hi = 2.0);

/// Full 11x11 report at the slow fixed point with the fast block at its
/// forced steady state.
StabilityReport stability_report_full(const ModelParameters& p, double epsilon,
                                      double lo = 0.01, double hi = 2.0);

/// Max real part over the 9x9 fast sub-block eigenvalues.
double fast_block_max_real_part(const ModelParameters& p);

/// Fast-block steady state forced by fixed slow values (solves the 9x9 linear
/// system).
std::array<double, kNumFast> fast_forced_steady_state(const ModelParameters& p,
                                                      double ad, double gaba_vlpo);

enum class BoundaryKind { TraceZero, BoundedEscape, RangeEdge };

std::string to_string(BoundaryKind kind);

struct WindowBoundary {
    double epsilon = 0.0;
    BoundaryKind kind = BoundaryKind::RangeEdge;
    double trace_at_boundary = 0.0;
};

struct SweepPoint {
    double epsilon = 0.0;
    bool has_fixed_point = false;
    FixedPoint fixed_point;
    StabilityClass slow_class = StabilityClass::Mixed;
    StabilityClass full_class = StabilityClass::Mixed;
    double trace = 0.0;
    double det = 0.0;
    bool bounded = false;     // short slow-system run stays in the guard box
    bool oscillatory = false; // unstable spiral, det > 0, bounded
};

struct SweepResult {
    std::vector<SweepPoint> points;
    bool window_found = false;
    WindowBoundary lower;
    WindowBoundary upper;
    std::vector<std::string> diagnostics;
};

struct SweepOptions {
    double lo = 0.25;
    double hi = 0.40;
    double resolution = 0.005;
    double boundary_tol = 1e-4;   // bisection width for interior boundaries
    double box_lo = kExcursionLo; // guard box for the bounded-trajectory check
    double box_hi = kExcursionHi;
    double sim_hours = 150.0;
    double sim_discard = 50.0;
    double sim_step = 0.002;
    bool parallel = true;
};

/// Classifies the slow fixed point across an epsilon grid and extracts the
/// contiguous oscillatory window: unstable-spiral fixed point with positive
/// determinant and bounded trajectories. Interior boundaries are bisected to
/// `boundary_tol` and tagged by the predicate that flips there.
SweepResult epsilon_stability_sweep(const ModelParameters& p,
                                    const SweepOptions& options);

/// Serial reference implementation of the sweep, kept for testing.
SweepResult epsilon_stability_sweep_serial(const ModelParameters& p,
                                           SweepOptions options);

struct SubsystemResult {
    std::map<std::string, double> steady_values;
    std::vector<std::complex<double>> eigenvalues;  // of the active block
    bool stable = false;
};

/// Solves the steady state of the active fast rows with all other variables
/// frozen. Throws SingularSystemError when the active block is not
/// invertible.
SubsystemResult subsystem_steady_state(const ModelParameters& p,
                                       const std::set<std::string>& active,
                                       const std::map<std::string, double>& frozen);

}  // namespace sleepwake
