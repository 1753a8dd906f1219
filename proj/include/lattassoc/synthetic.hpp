#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "lattassoc/lattice.hpp"
#include "lattassoc/weights.hpp"

namespace lattassoc {

struct SarSpec {
    double rho = 0.0;
    double noise_sd = 1.0;
    std::uint64_t seed = 0;
};

// Solves (I - rho W) x = rhs. Dense LU for n <= dense_solver_limit,
// BiCGSTAB (residual 1e-10) above. Throws SingularSystem.
inline constexpr std::size_t dense_solver_limit = 2500;
std::vector<double> solve_sar(const WeightMatrix& w, double rho, std::span<const double> rhs);

// n i.i.d. N(0, sd^2) draws from stream `stream` of `seed`.
std::vector<double> gaussian_noise(std::size_t n, double sd, std::uint64_t seed, std::uint64_t stream = 0);

/// x = (I - rho W)^-1 eps, eps ~ N(0, noise_sd^2) i.i.d.
/// Requires W row-standardized and |rho| < 1 (the reciprocal spectral radius
/// of a row-stochastic matrix).
std::vector<double> simulate_sar(const WeightMatrix& w, const SarSpec& spec);

struct CommonDriverSpec {
    SarSpec driver;          // z
    double a = 1.0;          // xi = a z + noise
    double b = 1.0;          // xj = b z + noise
    double noise_sd = 1.0;   // sd of the idiosyncratic noise
    // Optional block added to z before mixing (planted common hotspot).
    std::vector<std::size_t> hotspot_sites;
    double hotspot_shift = 0.0;
};

struct DriverTriple {
    std::vector<double> xi;
    std::vector<double> xj;
    std::vector<double> z;
};

DriverTriple simulate_common_driver(const WeightMatrix& w, const CommonDriverSpec& spec);

// rows x cols unit squares; ids "r<row>c<col>", row-major site order.
Lattice grid_lattice(std::size_t rows, std::size_t cols, double cell = 1.0);

// Row-major indices of a rectangular block inside a rows x cols grid.
std::vector<std::size_t> grid_block(std::size_t rows, std::size_t cols, std::size_t row0, std::size_t col0,
                                    std::size_t height, std::size_t width);

void plant_hotspot(std::span<double> x, std::span<const std::size_t> sites, double shift);

}  // namespace lattassoc
