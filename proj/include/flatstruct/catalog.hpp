#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "flatstruct/exprio.hpp"
#include "flatstruct/p6.hpp"

namespace flatstruct {

struct CatalogPath {
    std::vector<cd> start, end;  // (t1, t2)
    int count = 20;
    std::pair<int, int> entry{0, 1};  // 0-based
    cd z_seed = 0;

    std::vector<std::vector<cd>> points() const;       // (t1, t2)
    std::vector<std::vector<cd>> full_points() const;  // (t1, t2, 0)
    P6Path p6_path() const;
};

struct CatalogFlags {
    bool has_prepotential = false;
    bool has_extension = false;
};

struct CatalogEntry {
    std::string id;
    PvfDocument pvf;  // g is filled from the prepotential when only F is stored
    std::optional<std::string> prepotential;
    CatalogFlags flags;
    CatalogPath default_path;
    std::string notes;

    PotentialVF build() const;
};

std::vector<std::string> catalog_ids();
CatalogEntry catalog_get(const std::string& id);
CatalogEntry catalog_entry_from_json(const std::string& text);
std::string catalog_entry_to_json(const CatalogEntry& e);
// Path file: {"start": [[re, im], ...], "end": ..., "count": N, "z_seed": [re, im], "entry": [i, j]}.
CatalogPath path_from_json(const std::string& text);
std::string path_to_json(const CatalogPath& p);

enum class VerifyDepth { Symbolic, Numeric, Full };
VerifyDepth parse_depth(const std::string& s);
std::string to_string(VerifyDepth d);

struct Tolerances {
    double residual = 1e-6;  // PVI and Schlesinger
    double identity = 1e-10;  // eigen/residue identities
    double trace = 1e-8;      // trace constancy, round trips
};

struct CheckResult {
    std::string name;
    bool passed = false;
    std::optional<double> value;
    std::optional<double> tolerance;
    std::string detail;
};

struct VerifyReport {
    std::string id;
    VerifyDepth depth = VerifyDepth::Symbolic;
    Tolerances tol;
    std::vector<CheckResult> checks;
    double seconds = 0;
    bool passed() const;
    std::string to_json() const;
};

VerifyReport verify_entry(const CatalogEntry& e, VerifyDepth depth, const Tolerances& tol = {});
VerifyReport catalog_verify(const std::string& id, VerifyDepth depth, const Tolerances& tol = {});
// Entries run in parallel; results keep catalog order.
std::vector<VerifyReport> catalog_verify_all(VerifyDepth depth, const Tolerances& tol = {});

}  // namespace flatstruct
