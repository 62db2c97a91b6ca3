#include "sleepwake/params.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <limits>
#include <random>

#include "sleepwake/analysis.hpp"
#include "sleepwake/errors.hpp"

namespace sleepwake {

namespace {

constexpr int kNumCoefficients = 61;

const double kDefaultC[kNumCoefficients] = {
    0.75709, 0.28014, 0.61048, 0.76636, 0.32431,  // c1..c5
    0.83153, 0.03471, 0.01,    0.19577, 0.79157,  // c6..c10
    0.97026, -1.0,    0.0,     0.36341, 0.70633,  // c11..c15
    0.1,     0.97643, 0.56740, 0.91859, 0.50364,  // c16..c20
    0.23758, 0.1,     1.0,     0.0,     0.92037,  // c21..c25
    0.04185, 0.10973, 0.32943, 0.57879, 1.0,      // c26..c30
    0.02091, 0.12648, 0.23472, 0.57122, 0.02332,  // c31..c35
    1.0,     0.61305, 0.06864, 0.08638, 0.1,      // c36..c40
    0.543,   0.0,     0.13822, 0.35956, 0.11839,  // c41..c45
    0.13753, 0.1,     0.537,   0.0,     0.67749,  // c46..c50
    0.53609, 0.36464, 0.59591, 0.75091, 0.1,      // c51..c55
    0.22,    1e-5,    1e-5,    1e-5,    1e-5,     // c56..c60
    1e-5,                                          // c61
};

struct NamedDefault {
    const char* key;
    double value;
};

const NamedDefault kNamedDefaults[] = {
    {"ga1", 1.0},     {"hnet", 0.457}, {"hsert", 0.463}, {"hdat", 1.22},
    {"k1", 0.49},     {"k2", 0.1},     {"k3", 0.3},      {"k4", 0.15},
    {"mu", 0.3},      {"alpha", 1.0},  {"gamma", 8.0},   {"r0sq", 1.3},
    {"ad_max", 2.0},  {"ad_min", 0.01},
    {"gaba_max", 2.0},{"gaba_min", 0.01},
    {"time_scale", 1.0},
};

std::string ckey(int i) { return "c" + std::to_string(i); }

}  // namespace

std::string to_string(Provenance p) {
    switch (p) {
        case Provenance::PaperDefault: return "default";
        case Provenance::Searched: return "searched";
        case Provenance::User: return "user";
    }
    return "?";
}

double CoefficientTable::value(const std::string& key) const {
    auto it = entries.find(key);
    if (it == entries.end()) throw Error("unknown coefficient key '" + key + "'");
    return it->second.value;
}

void CoefficientTable::set(const std::string& key, double value, Provenance prov) {
    auto it = entries.find(key);
    if (it == entries.end()) throw Error("unknown coefficient key '" + key + "'");
    it->second.value = value;
    it->second.provenance = prov;
}

const std::vector<std::string>& coefficient_key_order() {
    static const std::vector<std::string> order = [] {
        std::vector<std::string> keys;
        for (int i = 1; i <= kNumCoefficients; ++i) keys.push_back(ckey(i));
        for (const auto& nd : kNamedDefaults) keys.emplace_back(nd.key);
        return keys;
    }();
    return order;
}

CoefficientTable default_coefficient_table() {
    CoefficientTable t;
    for (int i = 1; i <= kNumCoefficients; ++i) {
        t.entries[ckey(i)] = {kDefaultC[i - 1], Provenance::PaperDefault};
    }
    for (const auto& nd : kNamedDefaults) {
        t.entries[nd.key] = {nd.value, Provenance::PaperDefault};
    }
    return t;
}

ModelParameters assemble_parameters(const CoefficientTable& t) {
    auto c = [&t](int i) { return t.value(ckey(i)); };

    ModelParameters p;
    p.k1 = t.value("k1");
    p.k2 = t.value("k2");
    p.k3 = t.value("k3");
    p.k4 = t.value("k4");
    p.mu = t.value("mu");
    p.eps_weights = {c(57), c(58), c(59), c(60), c(61)};
    p.ga1 = t.value("ga1");
    p.hnet = t.value("hnet");
    p.hsert = t.value("hsert");
    p.hdat = t.value("hdat");
    p.alpha = t.value("alpha");
    p.gamma = t.value("gamma");
    p.r0sq = t.value("r0sq");
    p.ad_max = t.value("ad_max");
    p.ad_min = t.value("ad_min");
    p.gaba_max = t.value("gaba_max");
    p.gaba_min = t.value("gaba_min");
    p.time_scale = t.value("time_scale");

    FastMatrix& m = p.fast_matrix;
    for (auto& row : m) row.fill(0.0);

    // GABA_BFw: driven by OX, ACh_BF and AD; degradation plus GA1 uptake.
    m[kGabaBfw][kGabaBfw] = -(c(1) + p.ga1);
    m[kGabaBfw][kOx] = c(2);
    m[kGabaBfw][kAchBf] = c(3);
    m[kGabaBfw][kAd] = c(4);

    // GABA_BFs: degradation plus GA1 uptake; NA/AD drains, weak VLPO inflow.
    m[kGabaBfs][kGabaBfs] = -(c(5) + p.ga1);
    m[kGabaBfs][kNa] = -c(6);
    m[kGabaBfs][kAd] = -c(7);
    m[kGabaBfs][kGabaVlpo] = c(8);

    // OX: production from ACh_LDT/PPT, itself and AD (the knockout targets);
    // inhibited by GABA_BFs, NA net, S and GABA_VLPO.
    p.ox_production[kOx] = c(10);
    p.ox_removal[kOx] = -c(11);
    p.ox_production[kAchLdtppt] = std::abs(c(12));
    p.ox_production[kNa] = c(13);
    p.ox_removal[kNa] = -c(14);
    p.ox_production[kAd] = c(16);
    p.ox_removal[kGabaBfs] = -c(9);
    p.ox_removal[kS] = -c(15);
    p.ox_removal[kGabaVlpo] = -c(17);
    for (int j = 0; j < kNumConcentrations; ++j) {
        m[kOx][static_cast<size_t>(j)] =
            p.ox_removal[static_cast<size_t>(j)] +
            p.knockout_factor * p.ox_production[static_cast<size_t>(j)];
    }

    // H: driven by OX, ACh_BF, NA and AD; net self-loss, no uptake mechanism.
    m[kH][kOx] = c(18);
    m[kH][kH] = -(c(19) - c(20));
    m[kH][kAchBf] = c(21);
    m[kH][kNa] = c(22);
    m[kH][kAd] = c(23);
    m[kH][kGabaVlpo] = -c(24);

    // ACh_BF: driven by OX, H and AD; inhibited by GABA_BFs and S.
    m[kAchBf][kGabaBfs] = -c(25);
    m[kAchBf][kOx] = c(26);
    m[kAchBf][kH] = c(27);
    m[kAchBf][kAchBf] = -c(28);
    m[kAchBf][kS] = -c(29);
    m[kAchBf][kAd] = c(30);

    // ACh_LDT/PPT: driven by OX, H and AD; inhibited by NA and S.
    m[kAchLdtppt][kOx] = c(31);
    m[kAchLdtppt][kH] = c(32);
    m[kAchLdtppt][kAchLdtppt] = -c(33);
    m[kAchLdtppt][kNa] = -c(34);
    m[kAchLdtppt][kS] = -c(35);
    m[kAchLdtppt][kAd] = c(36);

    // NA: driven by OX, ACh_BF and AD; degradation plus hNET uptake.
    m[kNa][kOx] = c(37);
    m[kNa][kAchBf] = c(38);
    m[kNa][kNa] = -(c(39) + c(40) + p.hnet);
    m[kNa][kAd] = c(41);
    m[kNa][kGabaVlpo] = -c(42);

    // S: driven by OX, H, NA and AD; degradation plus hSERT uptake.
    m[kS][kOx] = c(43);
    m[kS][kH] = c(44);
    m[kS][kNa] = c(45);
    m[kS][kS] = -(c(46) + c(47) + p.hsert);
    m[kS][kAd] = c(48);
    m[kS][kGabaVlpo] = -c(49);

    // DA: driven by OX, ACh_LDT/PPT, S and AD; degradation plus hDAT uptake.
    m[kDa][kOx] = c(50);
    m[kDa][kAchLdtppt] = c(51);
    m[kDa][kNa] = -c(52);
    m[kDa][kS] = c(53);
    m[kDa][kDa] = -(c(54) + p.hdat);
    m[kDa][kAd] = c(55);
    m[kDa][kGabaVlpo] = -c(56);

    return p;
}

ModelParameters default_parameters() {
    return assemble_parameters(default_coefficient_table());
}

std::vector<Violation> validate(const ModelParameters& p) {
    std::vector<Violation> out;
    auto require = [&out](bool ok, const std::string& key, const std::string& msg) {
        if (!ok) out.push_back({key, msg, false});
    };
    require(p.k1 > 0.0, "k1", "k1 must be positive");
    require(p.k2 > 0.0, "k2", "k2 must be positive");
    require(p.k3 > 0.0, "k3", "k3 must be positive");
    require(p.k4 > 0.0, "k4", "k4 must be positive");
    require(p.mu > 0.0, "mu", "mu must be positive");
    for (size_t i = 0; i < p.eps_weights.size(); ++i) {
        const std::string key = "c" + std::to_string(57 + i);
        require(p.eps_weights[i] >= 0.0 && p.eps_weights[i] <= 1e-3, key,
                "epsilon weight must lie in [0, 1e-3]");
    }
    require(p.gamma >= 8.0 && p.gamma <= 16.0, "gamma",
            "gamma must lie in [8, 16]");
    require(p.r0sq > 0.0, "r0sq", "r0sq must be positive");
    require(p.alpha > 0.0, "alpha", "alpha must be positive");
    require(p.ad_min < p.ad_max, "ad_min", "ad_min must be below ad_max");
    require(p.gaba_min < p.gaba_max, "gaba_min",
            "gaba_min must be below gaba_max");
    require(p.time_scale > 0.0, "time_scale", "time_scale must be positive");
    require(p.knockout_factor >= 0.0 && p.knockout_factor <= 1.0,
            "knockout_factor", "knockout factor must lie in [0, 1]");
    for (int i = 0; i < kNumFast; ++i) {
        for (int j = 0; j < kNumConcentrations; ++j) {
            if (!(std::abs(p.fast_matrix[static_cast<size_t>(i)][static_cast<size_t>(j)]) <= 3.0)) {
                out.push_back({"fast_matrix",
                               "entry (" + std::to_string(i) + "," + std::to_string(j) +
                                   ") exceeds magnitude bound 3",
                               false});
            }
        }
    }
    if (!(p.mu > 0.29 && p.mu <= 0.32)) {
        out.push_back({"mu", "baseline epsilon outside (0.29, 0.32]", true});
    }
    return out;
}

std::vector<Violation> validate_table(const CoefficientTable& t) {
    std::vector<Violation> out;
    for (int i = 1; i <= kNumCoefficients; ++i) {
        if (i == 12) continue;  // sentinel entry, allowed negative
        const double v = t.value(ckey(i));
        if (!(v >= 0.0 && v <= 1.0)) {
            out.push_back({ckey(i), "raw coefficient must lie in [0, 1]", false});
        }
    }
    return out;
}

CoefficientTable parse_parameter_file(const std::string& path,
                                      std::vector<std::string>* notices) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open parameter file '" + path + "'");

    CoefficientTable table = default_coefficient_table();
    std::map<std::string, bool> seen;

    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        const auto first = line.find_first_not_of(" \t\r");
        if (first == std::string::npos) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw ParseError(path, lineno, "expected 'key = value'");
        }
        auto trim = [](std::string s) {
            const auto b = s.find_first_not_of(" \t\r");
            const auto e = s.find_last_not_of(" \t\r");
            return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
        };
        const std::string key = trim(line.substr(0, eq));
        const std::string valstr = trim(line.substr(eq + 1));
        if (table.entries.find(key) == table.entries.end()) {
            throw ValidationError(path, lineno, "unknown parameter key '" + key + "'");
        }
        try {
            size_t pos = 0;
            const double v = std::stod(valstr, &pos);
            if (pos != valstr.size()) throw std::invalid_argument("trailing");
            table.set(key, v, Provenance::User);
        } catch (const std::exception&) {
            throw ParseError(path, lineno, "invalid numeric value '" + valstr + "'");
        }
        seen[key] = true;
    }
    if (notices) {
        for (const auto& key : coefficient_key_order()) {
            if (!seen.count(key)) {
                notices->push_back("parameter '" + key + "' missing; default used");
            }
        }
    }
    return table;
}

void write_parameter_file(const CoefficientTable& table, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write parameter file '" + path + "'");
    out << "# sleepwake parameter file, format_version 1\n";
    out << "# key = value   (provenance in trailing comment)\n";
    char buf[64];
    for (const auto& key : coefficient_key_order()) {
        const auto& e = table.entries.at(key);
        const auto res = std::to_chars(buf, buf + sizeof(buf), e.value);
        out << key << " = " << std::string_view(buf, static_cast<size_t>(res.ptr - buf))
            << "  # " << to_string(e.provenance) << "\n";
    }
    if (!out) throw IoError("failed writing parameter file '" + path + "'");
}

std::string parameter_fingerprint(const ModelParameters& p) {
    // FNV-1a over the scalar fields in a fixed order.
    uint64_t h = 1469598103934665603ULL;
    auto mix = [&h](double value) {
        uint64_t bits = 0;
        std::memcpy(&bits, &value, sizeof(bits));
        for (int i = 0; i < 8; ++i) {
            h ^= (bits >> (8 * i)) & 0xffULL;
            h *= 1099511628211ULL;
        }
    };
    mix(p.k1); mix(p.k2); mix(p.k3); mix(p.k4); mix(p.mu);
    for (double w : p.eps_weights) mix(w);
    for (const auto& row : p.fast_matrix)
        for (double x : row) mix(x);
    for (double x : p.ox_production) mix(x);
    for (double x : p.ox_removal) mix(x);
    mix(p.knockout_factor);
    mix(p.ga1); mix(p.hnet); mix(p.hsert); mix(p.hdat);
    mix(p.alpha); mix(p.gamma); mix(p.r0sq);
    mix(p.ad_max); mix(p.ad_min); mix(p.gaba_max); mix(p.gaba_min);
    mix(p.time_scale);
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

std::map<std::string, std::pair<double, double>> default_search_bounds() {
    std::map<std::string, std::pair<double, double>> bounds;
    for (int i = 1; i <= kNumCoefficients; ++i) {
        if (i == 12) {
            bounds[ckey(i)] = {-1.0, -1.0};
        } else if (i >= 57) {
            bounds[ckey(i)] = {0.0, 1e-3};
        } else {
            bounds[ckey(i)] = {0.0, 1.0};
        }
    }
    return bounds;
}

namespace {

// Candidate k is generated from an engine seeded by (seed, k), so results do
// not depend on evaluation order or thread count.
CoefficientTable make_candidate(const SearchConstraints& cons, uint64_t index) {
    std::seed_seq seq{cons.seed, index + 1};
    std::mt19937_64 rng(seq);
    CoefficientTable table = default_coefficient_table();
    for (const auto& [key, range] : cons.bounds) {
        double v;
        if (range.first == range.second) {
            v = range.first;
        } else {
            std::uniform_real_distribution<double> dist(range.first, range.second);
            v = dist(rng);
        }
        table.set(key, v, Provenance::Searched);
    }
    return table;
}

double fast_block_max_real(const CoefficientTable& table) {
    const ModelParameters p = assemble_parameters(table);
    return fast_block_max_real_part(p);
}

// Candidates are evaluated in fixed-size blocks; the first block containing
// an acceptance ends the search and the smallest accepted index wins. This
// keeps the outcome identical between the serial and parallel paths.
SearchResult run_search(const SearchConstraints& cons, bool parallel) {
    if (cons.max_iterations < 1) throw Error("max_iterations must be >= 1");
    SearchResult result;
    result.seed = cons.seed;

    const int n = cons.max_iterations;
    constexpr int kBlock = 128;
    std::vector<double> max_re(static_cast<size_t>(n),
                               std::numeric_limits<double>::quiet_NaN());
    int accepted_index = -1;
    int evaluated_up_to = 0;

    for (int block_start = 0; block_start < n && accepted_index < 0;
         block_start += kBlock) {
        const int block_end = std::min(n, block_start + kBlock);
#pragma omp parallel for schedule(dynamic, 4) if (parallel)
        for (int i = block_start; i < block_end; ++i) {
            max_re[static_cast<size_t>(i)] =
                fast_block_max_real(make_candidate(cons, static_cast<uint64_t>(i)));
        }
        evaluated_up_to = block_end;
        for (int i = block_start; i < block_end; ++i) {
            if (max_re[static_cast<size_t>(i)] < cons.max_real_part) {
                accepted_index = i;
                break;
            }
        }
    }

    // The reported statistics cover candidates 0..chosen so that serial and
    // parallel runs agree even though the parallel path may evaluate a few
    // extra candidates at the tail of the accepting block.
    const int limit = accepted_index >= 0 ? accepted_index + 1 : evaluated_up_to;
    int best_index = 0;
    double best = std::numeric_limits<double>::infinity();
    for (int i = 0; i < limit; ++i) {
        if (max_re[static_cast<size_t>(i)] < best) {
            best = max_re[static_cast<size_t>(i)];
            best_index = i;
        }
    }

    const int chosen = accepted_index >= 0 ? accepted_index : best_index;
    result.accepted = accepted_index >= 0;
    result.iterations = limit;
    result.table = make_candidate(cons, static_cast<uint64_t>(chosen));
    result.max_real_part = max_re[static_cast<size_t>(chosen)];
    result.best_max_real_part = best;
    result.log.push_back(
        (result.accepted ? "accepted candidate " : "exhausted; best candidate ") +
        std::to_string(chosen) + " with max Re(eig) = " +
        std::to_string(result.max_real_part) + " after " +
        std::to_string(result.iterations) + " evaluations (seed " +
        std::to_string(cons.seed) + ")");
    return result;
}

}  // namespace

SearchResult search_coefficients(const SearchConstraints& constraints) {
    return run_search(constraints, constraints.parallel);
}

SearchResult search_coefficients_serial(const SearchConstraints& constraints) {
    return run_search(constraints, false);
}

}  // namespace sleepwake
