#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <string>

namespace sleepwake {

// Concentration variable ordering used everywhere: state arrays, the coupling
// matrix, Jacobians and CSV columns.
enum VarIndex : int {
    kGabaBfw = 0,
    kGabaBfs = 1,
    kOx = 2,
    kH = 3,
    kAchBf = 4,
    kAchLdtppt = 5,
    kNa = 6,
    kS = 7,
    kDa = 8,
    kAd = 9,
    kGabaVlpo = 10,
    kR = 11,
    kV = 12,
};

constexpr int kNumFast = 9;
constexpr int kNumConcentrations = 11;
constexpr int kNumVars = 13;

/// Short display names in canonical order.
const std::array<std::string, kNumVars>& variable_names();

/// The 13 dynamic variables at one time point. Nondimensional threshold-level
/// units; r is the REM amplitude and v its rate of change.
struct StateVector {
    double gaba_bfw = 0.0;
    double gaba_bfs = 0.0;
    double ox = 0.0;
    double h = 0.0;
    double ach_bf = 0.0;
    double ach_ldtppt = 0.0;
    double na = 0.0;
    double s = 0.0;
    double da = 0.0;
    double ad = 0.0;
    double gaba_vlpo = 0.0;
    double r = 0.0;
    double v = 0.0;

    std::array<double, kNumVars> to_array() const;
    static StateVector from_array(const std::array<double, kNumVars>& a);

    double operator[](int i) const { return to_array()[static_cast<size_t>(i)]; }
    bool all_finite() const;
    bool operator==(const StateVector&) const = default;
};

/// Default initial state: wake peak corner of the trapping box, fast variables
/// at 0.1, REM amplitude 1 at rest.
StateVector default_initial_state();

using FastMatrix = std::array<std::array<double, kNumConcentrations>, kNumFast>;

/// All rate constants of the coupled system. The fast coupling matrix stores
/// net signed coefficients with uptake constants folded into the diagonal.
/// The orexin row additionally keeps its production/removal split so that
/// knockout scaling can act on production inflows alone.
struct ModelParameters {
    // Slow system rates (per hour) and the epsilon baseline.
    double k1 = 0.0, k2 = 0.0, k3 = 0.0, k4 = 0.0;
    double mu = 0.0;
    // Fast-feedback weights a1..a5 on ACh_BF, ACh_LDT/PPT, NA, S, DA.
    std::array<double, 5> eps_weights{};

    FastMatrix fast_matrix{};
    // Orexin row split: entry = removal + knockout_factor * production.
    std::array<double, kNumConcentrations> ox_production{};
    std::array<double, kNumConcentrations> ox_removal{};
    double knockout_factor = 1.0;

    // Uptake transporter constants.
    double ga1 = 0.0, hnet = 0.0, hsert = 0.0, hdat = 0.0;

    // REM oscillator constants.
    double alpha = 0.0, gamma = 0.0, r0sq = 0.0;

    // Trapping-box bounds used by forced wake/sleep events.
    double ad_max = 0.0, ad_min = 0.0, gaba_max = 0.0, gaba_min = 0.0;

    // Global time dilation: the full vector field is divided by this factor,
    // stretching the measured period proportionally. 1.0 leaves the system
    // untouched.
    double time_scale = 1.0;

    bool operator==(const ModelParameters&) const = default;
};

// Numerical excursion guard for the slow phase plane. The default limit cycle
// peaks near 2.75/2.79, so the guard box is [-0.05, 3.0]^2.
constexpr double kExcursionLo = -0.05;
constexpr double kExcursionHi = 3.0;

enum class BehavioralPhase { Wake, SleepNREM, SleepREM };
enum class TransitionMarker { WakeInitialization, SleepInitialization };

struct BehavioralState {
    BehavioralPhase phase = BehavioralPhase::Wake;
    std::optional<TransitionMarker> marker;
    bool operator==(const BehavioralState&) const = default;
};

std::string to_string(BehavioralPhase phase);
std::string to_string(TransitionMarker marker);

/// epsilon = mu - (a1*ACh_BF + a2*ACh_LDT/PPT + a3*NA + a4*S + a5*DA).
/// Total function; no clamping at this layer.
double eval_epsilon(const StateVector& state, const ModelParameters& p);

struct SlowDerivatives {
    double d_ad = 0.0;
    double d_gaba_vlpo = 0.0;
};

/// Slow two-variable system. The quadratic term transfers mass: it appears
/// with opposite sign in the two components.
SlowDerivatives slow_rhs(const StateVector& state, const ModelParameters& p,
                         double epsilon);

/// Linear fast block: the first nine rows of the coupling matrix applied to
/// the 11 concentration variables.
std::array<double, kNumFast> fast_rhs(const StateVector& state,
                                      const ModelParameters& p);

struct RemDerivatives {
    double d_r = 0.0;
    double d_v = 0.0;
};

/// Second-order REM oscillator. d_ad must be the analytic slow_rhs value at
/// the same state, never a finite difference.
RemDerivatives rem_rhs(double r, double v, double ad, double gaba_vlpo,
                       double d_ad, const ModelParameters& p);

/// Full 13-component vector field. Evaluation order: epsilon, slow, fast,
/// REM (with d_ad from the slow block). Divided by time_scale when != 1.
std::array<double, kNumVars> full_rhs(const StateVector& state,
                                      const ModelParameters& p);

/// Wake iff ad > gaba_vlpo; in sleep, REM iff |r| > rem_threshold.
/// A transition marker is attached only at an exact touch (ad == gaba_vlpo)
/// whose derivative signs identify the crossing direction.
BehavioralState classify_state(const StateVector& state,
                               const std::array<double, kNumVars>& d_state,
                               double rem_threshold);

/// Returns a copy with the orexin-row production inflows from ACh_LDT/PPT,
/// NA, orexin itself and AD scaled by `factor`; removal terms are untouched.
/// Throws InvalidFactorError outside [0, 1].
ModelParameters apply_orexin_knockout(const ModelParameters& p, double factor);

}  // namespace sleepwake
