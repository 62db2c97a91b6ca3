#include "sleepwake/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <limits>

#include <Eigen/Eigenvalues>

#include "sleepwake/errors.hpp"
#include "sleepwake/integrator.hpp"

namespace sleepwake {

namespace {

// Zero of this function along the AD nullcline is a fixed point of the slow
// system: substitute ad = ad_nullcline(g) into the GABA balance.
double gaba_balance_on_ad_nullcline(double g, const ModelParameters& p,
                                    double epsilon) {
    const double ad = ad_nullcline(g, p);
    return -epsilon - p.k3 * g + (p.k4 + g * g) * ad;
}

double slow_residual(const ModelParameters& p, double epsilon, double g, double ad) {
    StateVector s;
    s.gaba_vlpo = g;
    s.ad = ad;
    const SlowDerivatives d = slow_rhs(s, p, epsilon);
    return std::max(std::abs(d.d_ad), std::abs(d.d_gaba_vlpo));
}

FixedPoint polish_root(const ModelParameters& p, double epsilon, double lo,
                       double hi) {
    // Bisection to a tight bracket, then Newton with a numeric derivative.
    double flo = gaba_balance_on_ad_nullcline(lo, p, epsilon);
    for (int it = 0; it < 200 && hi - lo > 1e-13; ++it) {
        const double mid = 0.5 * (lo + hi);
        const double fmid = gaba_balance_on_ad_nullcline(mid, p, epsilon);
        if ((flo <= 0.0) == (fmid <= 0.0)) {
            lo = mid;
            flo = fmid;
        } else {
            hi = mid;
        }
    }
    double g = 0.5 * (lo + hi);
    for (int it = 0; it < 8; ++it) {
        const double f = gaba_balance_on_ad_nullcline(g, p, epsilon);
        const double dg = 1e-7;
        const double fp = (gaba_balance_on_ad_nullcline(g + dg, p, epsilon) -
                           gaba_balance_on_ad_nullcline(g - dg, p, epsilon)) /
                          (2.0 * dg);
        if (fp == 0.0) break;
        const double step = f / fp;
        g -= step;
        if (std::abs(step) < 1e-15) break;
    }
    FixedPoint fp;
    fp.gaba_vlpo = g;
    fp.ad = ad_nullcline(g, p);
    fp.residual = slow_residual(p, epsilon, g, fp.ad);
    return fp;
}

}  // namespace

std::string to_string(StabilityClass c) {
    switch (c) {
        case StabilityClass::StableNode: return "stable node";
        case StabilityClass::StableSpiral: return "stable spiral";
        case StabilityClass::UnstableNode: return "unstable node";
        case StabilityClass::UnstableSpiral: return "unstable spiral";
        case StabilityClass::Center: return "center";
        case StabilityClass::Saddle: return "saddle";
        case StabilityClass::Mixed: return "mixed";
    }
    return "?";
}

std::string to_string(BoundaryKind kind) {
    switch (kind) {
        case BoundaryKind::TraceZero: return "trace_zero";
        case BoundaryKind::BoundedEscape: return "bounded_escape";
        case BoundaryKind::RangeEdge: return "range_edge";
    }
    return "?";
}

double ad_nullcline(double gaba_vlpo, const ModelParameters& p) {
    return p.k1 / (p.k2 + gaba_vlpo * gaba_vlpo);
}

double gaba_nullcline(double gaba_vlpo, const ModelParameters& p, double epsilon) {
    return (p.k3 * gaba_vlpo - epsilon) / (p.k4 + gaba_vlpo * gaba_vlpo);
}

FixedPoint find_fixed_point(const ModelParameters& p, double epsilon, double lo,
                            double hi, std::vector<FixedPoint>* others) {
    if (!(lo < hi)) throw Error("fixed-point interval requires lo < hi");
    constexpr int kScan = 4000;
    std::vector<FixedPoint> roots;
    double g_prev = lo;
    double f_prev = gaba_balance_on_ad_nullcline(lo, p, epsilon);
    for (int i = 1; i <= kScan; ++i) {
        const double g = lo + (hi - lo) * static_cast<double>(i) / kScan;
        const double f = gaba_balance_on_ad_nullcline(g, p, epsilon);
        if (f == 0.0 || (f_prev < 0.0) != (f < 0.0)) {
            roots.push_back(polish_root(p, epsilon, g_prev, g));
        }
        g_prev = g;
        f_prev = f;
    }
    if (roots.empty()) {
        throw NoRootInIntervalError(
            "no nullcline intersection for epsilon=" + std::to_string(epsilon) +
            " with gaba in [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
    }
    if (others) {
        others->assign(roots.begin() + 1, roots.end());
    }
    return roots.front();
}

Eigen::Matrix2d jacobian_slow(const FixedPoint& point, const ModelParameters& p) {
    const double g = point.gaba_vlpo;
    const double a = point.ad;
    Eigen::Matrix2d j;
    j(0, 0) = -p.k2 - g * g;
    j(0, 1) = -2.0 * g * a;
    j(1, 0) = p.k4 + g * g;
    j(1, 1) = -p.k3 + 2.0 * g * a;
    return j;
}

Eigen::MatrixXd jacobian_full(const StateVector& state, const ModelParameters& p) {
    Eigen::MatrixXd j = Eigen::MatrixXd::Zero(kNumConcentrations, kNumConcentrations);
    for (int i = 0; i < kNumFast; ++i) {
        for (int col = 0; col < kNumConcentrations; ++col) {
            j(i, col) = p.fast_matrix[static_cast<size_t>(i)][static_cast<size_t>(col)];
        }
    }
    const double g = state.gaba_vlpo;
    const double a = state.ad;
    j(kAd, kAd) = -p.k2 - g * g;
    j(kAd, kGabaVlpo) = -2.0 * g * a;
    // d(gaba)/dt contains -epsilon, so each fast feedback enters with +a_i.
    j(kGabaVlpo, kAchBf) = p.eps_weights[0];
    j(kGabaVlpo, kAchLdtppt) = p.eps_weights[1];
    j(kGabaVlpo, kNa) = p.eps_weights[2];
    j(kGabaVlpo, kS) = p.eps_weights[3];
    j(kGabaVlpo, kDa) = p.eps_weights[4];
    j(kGabaVlpo, kAd) = p.k4 + g * g;
    j(kGabaVlpo, kGabaVlpo) = -p.k3 + 2.0 * g * a;
    if (p.time_scale != 1.0) j /= p.time_scale;
    return j;
}

std::vector<std::complex<double>> eigenvalues(const Eigen::MatrixXd& m) {
    if (m.rows() != m.cols()) throw Error("eigenvalues: matrix must be square");
    if (m.rows() > 16) throw Error("eigenvalues: matrix larger than 16x16");
    if (!m.allFinite()) throw Error("eigenvalues: matrix has non-finite entries");

    Eigen::EigenSolver<Eigen::MatrixXd> solver(m, /*computeEigenvectors=*/true);
    auto fingerprint = [&m] {
        uint64_t h = 1469598103934665603ULL;
        for (Eigen::Index i = 0; i < m.size(); ++i) {
            uint64_t bits = 0;
            const double value = m.data()[i];
            std::memcpy(&bits, &value, sizeof(bits));
            h = (h ^ bits) * 1099511628211ULL;
        }
        char buf[17];
        std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
        return std::string(buf);
    };
    if (solver.info() != Eigen::Success) {
        throw ConvergenceFailureError("eigenvalue iteration failed for matrix " +
                                      fingerprint());
    }

    const double scale = std::max(m.norm(), 1e-300);
    for (Eigen::Index k = 0; k < m.rows(); ++k) {
        const auto lambda = solver.eigenvalues()(k);
        const Eigen::VectorXcd vec = solver.eigenvectors().col(k);
        const double residual =
            (m.cast<std::complex<double>>() * vec - lambda * vec).norm() /
            (scale * vec.norm());
        if (!(residual < 1e-8)) {
            throw ConvergenceFailureError(
                "eigenpair residual " + std::to_string(residual) +
                " exceeds bound for matrix " + fingerprint());
        }
    }

    std::vector<std::complex<double>> out(static_cast<size_t>(m.rows()));
    for (Eigen::Index k = 0; k < m.rows(); ++k) out[static_cast<size_t>(k)] = solver.eigenvalues()(k);
    std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
        if (a.real() != b.real()) return a.real() < b.real();
        return a.imag() < b.imag();
    });
    return out;
}

StabilityClass classify_2x2(double trace, double det) {
    if (det < 0.0) return StabilityClass::Saddle;
    const double disc = trace * trace - 4.0 * det;
    if (trace == 0.0) return StabilityClass::Center;
    if (trace > 0.0) {
        return disc < 0.0 ? StabilityClass::UnstableSpiral : StabilityClass::UnstableNode;
    }
    return disc < 0.0 ? StabilityClass::StableSpiral : StabilityClass::StableNode;
}

StabilityClass classify_eigenvalues(const std::vector<std::complex<double>>& eigs) {
    bool any_pos = false, any_neg = false, any_zero = false, any_complex = false;
    for (const auto& z : eigs) {
        if (z.real() > 0.0) any_pos = true;
        else if (z.real() < 0.0) any_neg = true;
        else any_zero = true;
        if (z.imag() != 0.0) any_complex = true;
    }
    if (any_zero && !any_pos && !any_neg) return StabilityClass::Center;
    if (any_pos && any_neg) {
        return any_complex ? StabilityClass::Mixed : StabilityClass::Saddle;
    }
    if (any_pos) {
        return any_complex ? StabilityClass::UnstableSpiral : StabilityClass::UnstableNode;
    }
    if (any_zero) return StabilityClass::Mixed;
    return any_complex ? StabilityClass::StableSpiral : StabilityClass::StableNode;
}

StabilityReport stability_report_slow(const ModelParameters& p, double epsilon,
                                      double lo, double hi) {
    StabilityReport report;
    report.epsilon_used = epsilon;
    report.fixed_point = find_fixed_point(p, epsilon, lo, hi);
    const Eigen::Matrix2d j = jacobian_slow(report.fixed_point, p);
    report.jacobian = j;
    report.eigenvalues = eigenvalues(j);
    report.classification = classify_2x2(j.trace(), j.determinant());
    return report;
}

std::array<double, kNumFast> fast_forced_steady_state(const ModelParameters& p,
                                                      double ad, double gaba_vlpo) {
    Eigen::Matrix<double, kNumFast, kNumFast> a;
    Eigen::Matrix<double, kNumFast, 1> b;
    for (int i = 0; i < kNumFast; ++i) {
        for (int jcol = 0; jcol < kNumFast; ++jcol) {
            a(i, jcol) = p.fast_matrix[static_cast<size_t>(i)][static_cast<size_t>(jcol)];
        }
        b(i) = -(p.fast_matrix[static_cast<size_t>(i)][kAd] * ad +
                 p.fast_matrix[static_cast<size_t>(i)][kGabaVlpo] * gaba_vlpo);
    }
    const Eigen::FullPivLU<Eigen::Matrix<double, kNumFast, kNumFast>> lu(a);
    if (!lu.isInvertible()) {
        throw SingularSystemError("fast block is singular; no forced steady state");
    }
    const Eigen::Matrix<double, kNumFast, 1> x = lu.solve(b);
    std::array<double, kNumFast> out{};
    for (int i = 0; i < kNumFast; ++i) out[static_cast<size_t>(i)] = x(i);
    return out;
}

StabilityReport stability_report_full(const ModelParameters& p, double epsilon,
                                      double lo, double hi) {
    StabilityReport report;
    report.epsilon_used = epsilon;
    report.fixed_point = find_fixed_point(p, epsilon, lo, hi);
    StateVector s;
    const auto fast = fast_forced_steady_state(p, report.fixed_point.ad,
                                               report.fixed_point.gaba_vlpo);
    s.gaba_bfw = fast[0]; s.gaba_bfs = fast[1]; s.ox = fast[2];
    s.h = fast[3]; s.ach_bf = fast[4]; s.ach_ldtppt = fast[5];
    s.na = fast[6]; s.s = fast[7]; s.da = fast[8];
    s.ad = report.fixed_point.ad;
    s.gaba_vlpo = report.fixed_point.gaba_vlpo;
    report.jacobian = jacobian_full(s, p);
    report.eigenvalues = eigenvalues(report.jacobian);
    report.classification = classify_eigenvalues(report.eigenvalues);
    return report;
}

double fast_block_max_real_part(const ModelParameters& p) {
    Eigen::MatrixXd a(kNumFast, kNumFast);
    for (int i = 0; i < kNumFast; ++i) {
        for (int j = 0; j < kNumFast; ++j) {
            a(i, j) = p.fast_matrix[static_cast<size_t>(i)][static_cast<size_t>(j)];
        }
    }
    double max_re = -std::numeric_limits<double>::infinity();
    for (const auto& z : eigenvalues(a)) max_re = std::max(max_re, z.real());
    return max_re;
}

namespace {

// Slow-system-only trajectory check: from the wake corner, does the orbit
// stay inside the guard box after the startup transient?
bool slow_orbit_bounded(const ModelParameters& p, double epsilon,
                        const SweepOptions& opt) {
    double ad = p.ad_max;
    double gv = p.gaba_min;
    const double h = opt.sim_step;
    const long n = static_cast<long>(std::llround(opt.sim_hours / h));
    auto rhs = [&p, epsilon](double a, double g, double& da, double& dg) {
        const double tr = g * g * a;
        da = p.k1 - p.k2 * a - tr;
        dg = -epsilon - p.k3 * g + p.k4 * a + tr;
    };
    for (long i = 0; i < n; ++i) {
        double k1a, k1g, k2a, k2g, k3a, k3g, k4a, k4g;
        rhs(ad, gv, k1a, k1g);
        rhs(ad + 0.5 * h * k1a, gv + 0.5 * h * k1g, k2a, k2g);
        rhs(ad + 0.5 * h * k2a, gv + 0.5 * h * k2g, k3a, k3g);
        rhs(ad + h * k3a, gv + h * k3g, k4a, k4g);
        ad += h / 6.0 * (k1a + 2.0 * k2a + 2.0 * k3a + k4a);
        gv += h / 6.0 * (k1g + 2.0 * k2g + 2.0 * k3g + k4g);
        if (!std::isfinite(ad) || !std::isfinite(gv)) return false;
        if (static_cast<double>(i + 1) * h > opt.sim_discard) {
            if (ad < opt.box_lo || ad > opt.box_hi || gv < opt.box_lo ||
                gv > opt.box_hi) {
                return false;
            }
        }
    }
    return true;
}

SweepPoint evaluate_sweep_point(const ModelParameters& p, double epsilon,
                                const SweepOptions& opt) {
    SweepPoint pt;
    pt.epsilon = epsilon;
    try {
        pt.fixed_point = find_fixed_point(p, epsilon, 0.01, 2.0);
        pt.has_fixed_point = true;
    } catch (const NoRootInIntervalError&) {
        return pt;
    }
    const Eigen::Matrix2d j = jacobian_slow(pt.fixed_point, p);
    pt.trace = j.trace();
    pt.det = j.determinant();
    pt.slow_class = classify_2x2(pt.trace, pt.det);
    try {
        StabilityReport full = stability_report_full(p, epsilon);
        pt.full_class = full.classification;
    } catch (const Error&) {
        pt.full_class = StabilityClass::Mixed;
    }
    pt.bounded = slow_orbit_bounded(p, epsilon, opt);
    pt.oscillatory = pt.slow_class == StabilityClass::UnstableSpiral &&
                     pt.det > 0.0 && pt.bounded;
    return pt;
}

bool point_oscillatory(const ModelParameters& p, double epsilon,
                       const SweepOptions& opt) {
    return evaluate_sweep_point(p, epsilon, opt).oscillatory;
}

WindowBoundary bisect_boundary(const ModelParameters& p, double eps_in,
                               double eps_out, const SweepOptions& opt) {
    // eps_in is oscillatory, eps_out is not; narrow to boundary_tol and tag
    // the boundary by the predicate that changed.
    const SweepPoint inside = evaluate_sweep_point(p, eps_in, opt);
    double a = eps_in, b = eps_out;
    while (std::abs(b - a) > opt.boundary_tol) {
        const double mid = 0.5 * (a + b);
        if (point_oscillatory(p, mid, opt)) {
            a = mid;
        } else {
            b = mid;
        }
    }
    const double boundary = 0.5 * (a + b);
    WindowBoundary wb;
    wb.epsilon = boundary;
    const SweepPoint outside = evaluate_sweep_point(p, b, opt);
    if (outside.has_fixed_point && inside.bounded != outside.bounded &&
        outside.slow_class == StabilityClass::UnstableSpiral) {
        wb.kind = BoundaryKind::BoundedEscape;
    } else {
        wb.kind = BoundaryKind::TraceZero;
    }
    const SweepPoint at = evaluate_sweep_point(p, boundary, opt);
    wb.trace_at_boundary = at.has_fixed_point ? at.trace : std::nan("");
    return wb;
}

SweepResult run_sweep(const ModelParameters& p, const SweepOptions& opt,
                      bool parallel) {
    if (!(opt.lo <= opt.hi)) throw Error("sweep requires lo <= hi");
    if (!(opt.resolution > 0.0)) throw Error("sweep resolution must be positive");

    SweepResult result;
    const int n = opt.lo == opt.hi
                      ? 1
                      : static_cast<int>(std::floor((opt.hi - opt.lo) / opt.resolution + 1e-9)) + 1;
    result.points.resize(static_cast<size_t>(n));

#pragma omp parallel for schedule(dynamic) if (parallel)
    for (int i = 0; i < n; ++i) {
        const double eps = opt.lo + static_cast<double>(i) * opt.resolution;
        result.points[static_cast<size_t>(i)] = evaluate_sweep_point(p, eps, opt);
    }

    for (const auto& pt : result.points) {
        if (!pt.has_fixed_point) {
            result.diagnostics.push_back("no fixed point at epsilon=" +
                                         std::to_string(pt.epsilon));
        }
    }

    // Longest contiguous oscillatory run.
    int best_start = -1, best_len = 0;
    for (int i = 0; i < n;) {
        if (!result.points[static_cast<size_t>(i)].oscillatory) {
            ++i;
            continue;
        }
        int j = i;
        while (j < n && result.points[static_cast<size_t>(j)].oscillatory) ++j;
        if (j - i > best_len) {
            best_len = j - i;
            best_start = i;
        }
        i = j;
    }
    if (best_start < 0) return result;

    result.window_found = true;
    const int lo_idx = best_start;
    const int hi_idx = best_start + best_len - 1;

    if (lo_idx == 0) {
        result.lower = {result.points[static_cast<size_t>(lo_idx)].epsilon, BoundaryKind::RangeEdge,
                        result.points[static_cast<size_t>(lo_idx)].trace};
    } else {
        result.lower = bisect_boundary(p, result.points[static_cast<size_t>(lo_idx)].epsilon,
                                       result.points[static_cast<size_t>(lo_idx - 1)].epsilon, opt);
    }
    if (hi_idx == n - 1) {
        result.upper = {result.points[static_cast<size_t>(hi_idx)].epsilon, BoundaryKind::RangeEdge,
                        result.points[static_cast<size_t>(hi_idx)].trace};
    } else {
        result.upper = bisect_boundary(p, result.points[static_cast<size_t>(hi_idx)].epsilon,
                                       result.points[static_cast<size_t>(hi_idx + 1)].epsilon, opt);
    }
    return result;
}

}  // namespace

SweepResult epsilon_stability_sweep(const ModelParameters& p,
                                    const SweepOptions& options) {
    return run_sweep(p, options, options.parallel);
}

SweepResult epsilon_stability_sweep_serial(const ModelParameters& p,
                                           SweepOptions options) {
    options.parallel = false;
    return run_sweep(p, options, false);
}

SubsystemResult subsystem_steady_state(const ModelParameters& p,
                                       const std::set<std::string>& active,
                                       const std::map<std::string, double>& frozen) {
    if (active.empty()) throw Error("active set must not be empty");

    std::map<std::string, int> index_by_name;
    for (int i = 0; i < kNumVars; ++i) index_by_name[variable_names()[static_cast<size_t>(i)]] = i;

    std::vector<int> active_idx;
    for (const auto& name : active) {
        auto it = index_by_name.find(name);
        if (it == index_by_name.end() || it->second >= kNumFast) {
            throw Error("active set entry '" + name + "' is not a fast variable");
        }
        active_idx.push_back(it->second);
    }
    std::sort(active_idx.begin(), active_idx.end());

    std::array<double, kNumConcentrations> values{};
    std::array<bool, kNumConcentrations> is_active{};
    for (int idx : active_idx) is_active[static_cast<size_t>(idx)] = true;
    for (int j = 0; j < kNumConcentrations; ++j) {
        if (is_active[static_cast<size_t>(j)]) continue;
        const std::string& name = variable_names()[static_cast<size_t>(j)];
        auto it = frozen.find(name);
        if (it == frozen.end()) {
            throw Error("frozen value required for inactive variable '" + name + "'");
        }
        values[static_cast<size_t>(j)] = it->second;
    }

    const int na = static_cast<int>(active_idx.size());
    Eigen::MatrixXd a(na, na);
    Eigen::VectorXd b(na);
    for (int r = 0; r < na; ++r) {
        const auto row = static_cast<size_t>(active_idx[static_cast<size_t>(r)]);
        double inflow = 0.0;
        for (int j = 0; j < kNumConcentrations; ++j) {
            if (!is_active[static_cast<size_t>(j)]) {
                inflow += p.fast_matrix[row][static_cast<size_t>(j)] * values[static_cast<size_t>(j)];
            }
        }
        b(r) = -inflow;
        for (int cidx = 0; cidx < na; ++cidx) {
            a(r, cidx) = p.fast_matrix[row][static_cast<size_t>(active_idx[static_cast<size_t>(cidx)])];
        }
    }

    const Eigen::FullPivLU<Eigen::MatrixXd> lu(a);
    if (!lu.isInvertible()) {
        throw SingularSystemError("active sub-system block is singular");
    }
    const Eigen::VectorXd x = lu.solve(b);

    SubsystemResult result;
    for (int r = 0; r < na; ++r) {
        result.steady_values[variable_names()[static_cast<size_t>(active_idx[static_cast<size_t>(r)])]] = x(r);
    }
    result.eigenvalues = eigenvalues(a);
    result.stable = true;
    for (const auto& z : result.eigenvalues) {
        if (!(z.real() < 0.0)) result.stable = false;
    }
    return result;
}

}  // namespace sleepwake
