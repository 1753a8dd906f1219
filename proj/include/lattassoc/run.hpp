#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "lattassoc/global_assoc.hpp"
#include "lattassoc/inference.hpp"
#include "lattassoc/weights.hpp"

namespace lattassoc {

enum class Command { Weights, Global, Local, SigMap, Simulate };

struct HotspotBlock {
    std::size_t row0 = 0;
    std::size_t col0 = 0;
    std::size_t height = 0;
    std::size_t width = 0;
    double shift = 3.0;
};

struct RunConfig {
    Command command = Command::Global;

    // inputs
    std::string geojson_path;
    std::string data_path;
    std::string weights = "queen";  // GAL/GWT path or queen|rook|knn:k|dist:d|band:lo,hi
    std::size_t order = 1;
    bool symmetrize = false;
    double snap_tolerance = 0.0;
    bool strict = false;
    Standardization standardize = Standardization::RowStandardized;

    // statistic
    StatKind stat = StatKind::MoranI;
    Variant variant = Variant::Univariate;
    std::string var_i;
    std::string var_j;
    std::vector<std::string> given;
    bool recursion = false;  // |c| = 1 partial through the bivariate recursion

    // inference
    std::size_t permutations = 0;  // 0: none (global/local); sigmap defaults to 999
    std::uint64_t seed = 0;
    Alternative alternative = Alternative::TwoSided;
    double alpha = 0.05;
    bool fdr = false;
    int threads = 0;  // 0: OpenMP default

    // outputs
    std::string out_path;
    std::string geojson_out_path;

    // simulate
    std::size_t rows = 10;
    std::size_t cols = 10;
    std::string model = "sar";  // sar | driver
    double rho = 0.0;
    double noise_sd = 1.0;
    double driver_a = 1.0;
    double driver_b = 1.0;
    std::optional<HotspotBlock> hotspot;

    // Throws ConfigError on incoherent combinations.
    void validate() const;
};

// Parses "queen", "rook", "knn:4", "dist:1.5", "band:0.5,2".
NeighborSpec parse_neighbor_spec(const std::string& text);

// Executes a configured command. Writes the one-line summary to `out`;
// errors propagate as lattassoc::Error.
void run(const RunConfig& config, std::ostream& out, std::ostream& err);

// Full command-line entry point: parses args (args[0] is the program name),
// runs, and reports failures as a JSON object on `err`. Returns the exit code.
int cli_main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace lattassoc
