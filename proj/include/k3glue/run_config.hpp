#pragma once

/// Structured-text run configuration. Sections [torus], [weights], [pair]
/// (repeatable) and [run]; key = value lines, '#' comments. Unknown sections
/// or keys are errors, reported with their line number. Values of the form
/// 2^-k are accepted wherever a real number is.

#include <array>
#include <istream>
#include <string>
#include <vector>

#include "k3glue/charge_config.hpp"

namespace k3glue {

struct RunConfig {
    int schema_version = 1;
    Matrix3 basis = Matrix3::Identity();
    std::array<int, 8> dihedral_weights = {2, 2, 2, 2, 2, 2, 2, 2};
    std::vector<PairSpec> pairs;

    std::vector<double> epsilons;
    double beta = 0.4;
    int grid_dirs = 256;
    int grid_rho = 16;
    int collapse_grid = 32;
    std::string tol_profile = "strict";  // strict | fast
    std::string out_dir = "out";
    std::string cache_dir;
    int threads = 0;  // 0 -> hardware

    static RunConfig parse(std::istream& in, const std::string& name);
    static RunConfig parse_file(const std::string& path);

    FlatTorus torus() const { return FlatTorus(basis); }
    ChargeConfig charge_config() const;

    /// Grid sizes after applying the tolerance profile.
    int effective_dirs() const { return tol_profile == "fast" ? std::max(16, grid_dirs / 4) : grid_dirs; }
    int effective_rho() const { return tol_profile == "fast" ? std::max(4, grid_rho / 2) : grid_rho; }
};

} // namespace k3glue
