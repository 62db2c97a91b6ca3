#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "sleepwake/model.hpp"

namespace sleepwake {

enum class Provenance { PaperDefault, Searched, User };

std::string to_string(Provenance p);

/// Named scalar store for every tunable of the model: the 61 coupling
/// coefficients, slow-system rates, uptake constants and REM constants.
struct CoefficientTable {
    struct Entry {
        double value = 0.0;
        Provenance provenance = Provenance::PaperDefault;
        bool operator==(const Entry&) const = default;
    };

    std::map<std::string, Entry> entries;

    double value(const std::string& key) const;
    void set(const std::string& key, double value, Provenance prov);
    bool operator==(const CoefficientTable&) const = default;
};

/// Canonical key order for serialization: c1..c61, then the named constants.
const std::vector<std::string>& coefficient_key_order();

/// Built-in default table.
CoefficientTable default_coefficient_table();

/// Builds runtime parameters from a table: assembles the 9x11 coupling matrix
/// (uptake constants folded into diagonals, orexin row kept as
/// removal + factor*production) and copies the scalar constants.
ModelParameters assemble_parameters(const CoefficientTable& table);

/// assemble_parameters(default_coefficient_table()).
ModelParameters default_parameters();

struct Violation {
    std::string key;
    std::string message;
    bool advisory = false;
};

/// Empty result iff all parameter invariants hold. Advisory entries flag the
/// baseline epsilon leaving its oscillatory window without failing validation.
std::vector<Violation> validate(const ModelParameters& p);

/// Table-level checks (raw coefficient ranges).
std::vector<Violation> validate_table(const CoefficientTable& table);

/// Key-value parameter file. Unknown keys are errors; missing keys take the
/// default value and are reported through `notices`.
CoefficientTable parse_parameter_file(const std::string& path,
                                      std::vector<std::string>* notices = nullptr);
void write_parameter_file(const CoefficientTable& table, const std::string& path);

/// FNV-1a hash over the canonical byte serialization; stable across runs.
std::string parameter_fingerprint(const ModelParameters& p);

struct SearchConstraints {
    // Inclusive bounds per coefficient key; keys absent here keep defaults
    // fixed. Empty map searches c1..c61 over their natural ranges.
    std::map<std::string, std::pair<double, double>> bounds;
    double max_real_part = 0.0;   // acceptance: max Re(eig) < this
    uint64_t seed = 20250801;
    int max_iterations = 20000;
    bool parallel = true;
};

struct SearchResult {
    CoefficientTable table;       // accepted candidate, or best seen
    bool accepted = false;
    int iterations = 0;           // candidates evaluated (accepted index + 1)
    double max_real_part = 0.0;   // of the returned candidate's fast block
    double best_max_real_part = 0.0;
    uint64_t seed = 0;
    std::vector<std::string> log;
};

/// Seeded rejection search: draws candidate coefficient sets uniformly within
/// bounds and accepts the first whose 9x9 fast block has max Re(eig) below
/// the threshold. Deterministic for a given seed regardless of thread count.
SearchResult search_coefficients(const SearchConstraints& constraints);

/// Serial reference implementation of the same search, kept for testing.
SearchResult search_coefficients_serial(const SearchConstraints& constraints);

/// Natural search bounds: [0,1] for coupling coefficients, [0,1e-3] for the
/// epsilon weights, the sentinel c12 pinned at its default.
std::map<std::string, std::pair<double, double>> default_search_bounds();

}  // namespace sleepwake
