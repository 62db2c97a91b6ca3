#include "sleepwake/model.hpp"

#include <cmath>

#include "sleepwake/errors.hpp"

namespace sleepwake {

const std::array<std::string, kNumVars>& variable_names() {
    static const std::array<std::string, kNumVars> names = {
        "GABA_BFw", "GABA_BFs", "OX",  "H",  "ACh_BF", "ACh_LDTPPT", "NA",
        "S",        "DA",       "AD",  "GABA_VLPO", "R", "V"};
    return names;
}

std::array<double, kNumVars> StateVector::to_array() const {
    return {gaba_bfw, gaba_bfs, ox, h, ach_bf, ach_ldtppt, na,
            s, da, ad, gaba_vlpo, r, v};
}

StateVector StateVector::from_array(const std::array<double, kNumVars>& a) {
    StateVector s;
    s.gaba_bfw = a[0];
    s.gaba_bfs = a[1];
    s.ox = a[2];
    s.h = a[3];
    s.ach_bf = a[4];
    s.ach_ldtppt = a[5];
    s.na = a[6];
    s.s = a[7];
    s.da = a[8];
    s.ad = a[9];
    s.gaba_vlpo = a[10];
    s.r = a[11];
    s.v = a[12];
    return s;
}

bool StateVector::all_finite() const {
    for (double x : to_array()) {
        if (!std::isfinite(x)) return false;
    }
    return true;
}

StateVector default_initial_state() {
    StateVector s;
    s.gaba_bfw = s.gaba_bfs = s.ox = s.h = s.ach_bf = 0.1;
    s.ach_ldtppt = s.na = s.s = s.da = 0.1;
    s.ad = 2.0;
    s.gaba_vlpo = 0.01;
    s.r = 1.0;
    s.v = 0.0;
    return s;
}

std::string to_string(BehavioralPhase phase) {
    switch (phase) {
        case BehavioralPhase::Wake: return "wake";
        case BehavioralPhase::SleepNREM: return "nrem";
        case BehavioralPhase::SleepREM: return "rem";
    }
    return "?";
}

std::string to_string(TransitionMarker marker) {
    return marker == TransitionMarker::WakeInitialization ? "wake_init"
                                                          : "sleep_init";
}

double eval_epsilon(const StateVector& state, const ModelParameters& p) {
    return p.mu - (p.eps_weights[0] * state.ach_bf +
                   p.eps_weights[1] * state.ach_ldtppt +
                   p.eps_weights[2] * state.na +
                   p.eps_weights[3] * state.s +
                   p.eps_weights[4] * state.da);
}

SlowDerivatives slow_rhs(const StateVector& state, const ModelParameters& p,
                         double epsilon) {
    const double ad = state.ad;
    const double gv = state.gaba_vlpo;
    const double transfer = gv * gv * ad;
    SlowDerivatives d;
    d.d_ad = p.k1 - p.k2 * ad - transfer;
    d.d_gaba_vlpo = -epsilon - p.k3 * gv + p.k4 * ad + transfer;
    return d;
}

std::array<double, kNumFast> fast_rhs(const StateVector& state,
                                      const ModelParameters& p) {
    const std::array<double, kNumVars> x = state.to_array();
    std::array<double, kNumFast> out{};
    for (int i = 0; i < kNumFast; ++i) {
        double acc = 0.0;
        for (int j = 0; j < kNumConcentrations; ++j) {
            acc += p.fast_matrix[static_cast<size_t>(i)][static_cast<size_t>(j)] *
                   x[static_cast<size_t>(j)];
        }
        out[static_cast<size_t>(i)] = acc;
    }
    return out;
}

RemDerivatives rem_rhs(double r, double v, double ad, double gaba_vlpo,
                       double d_ad, const ModelParameters& p) {
    RemDerivatives d;
    d.d_r = v;
    const double damping =
        2.0 * ((gaba_vlpo - ad) * (r * r - p.r0sq) + p.alpha * d_ad);
    d.d_v = -damping * v - (p.gamma + d_ad * d_ad) * r;
    return d;
}

std::array<double, kNumVars> full_rhs(const StateVector& state,
                                      const ModelParameters& p) {
    const double epsilon = eval_epsilon(state, p);
    const SlowDerivatives slow = slow_rhs(state, p, epsilon);
    const std::array<double, kNumFast> fast = fast_rhs(state, p);
    const RemDerivatives rem =
        rem_rhs(state.r, state.v, state.ad, state.gaba_vlpo, slow.d_ad, p);

    std::array<double, kNumVars> out{};
    for (int i = 0; i < kNumFast; ++i) out[static_cast<size_t>(i)] = fast[static_cast<size_t>(i)];
    out[kAd] = slow.d_ad;
    out[kGabaVlpo] = slow.d_gaba_vlpo;
    out[kR] = rem.d_r;
    out[kV] = rem.d_v;
    if (p.time_scale != 1.0) {
        for (double& x : out) x /= p.time_scale;
    }
    return out;
}

BehavioralState classify_state(const StateVector& state,
                               const std::array<double, kNumVars>& d_state,
                               double rem_threshold) {
    BehavioralState result;
    const double diff = state.ad - state.gaba_vlpo;
    if (diff > 0.0) {
        result.phase = BehavioralPhase::Wake;
    } else {
        result.phase = std::abs(state.r) > rem_threshold
                           ? BehavioralPhase::SleepREM
                           : BehavioralPhase::SleepNREM;
    }
    if (diff == 0.0) {
        const double d_ad = d_state[kAd];
        const double d_gv = d_state[kGabaVlpo];
        if (d_ad > 0.0 && d_gv < 0.0) {
            result.marker = TransitionMarker::WakeInitialization;
        } else if (d_ad < 0.0 && d_gv > 0.0) {
            result.marker = TransitionMarker::SleepInitialization;
        }
    }
    return result;
}

ModelParameters apply_orexin_knockout(const ModelParameters& p, double factor) {
    if (!(factor >= 0.0 && factor <= 1.0)) throw InvalidFactorError(factor);
    ModelParameters out = p;
    out.knockout_factor = factor;
    for (int j = 0; j < kNumConcentrations; ++j) {
        out.fast_matrix[kOx][static_cast<size_t>(j)] =
            out.ox_removal[static_cast<size_t>(j)] +
            factor * out.ox_production[static_cast<size_t>(j)];
    }
    return out;
}

}  // namespace sleepwake
