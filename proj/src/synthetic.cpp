#include "lattassoc/synthetic.hpp"

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <cmath>
#include <string>

#include "lattassoc/error.hpp"
#include "lattassoc/rng.hpp"

namespace lattassoc {

namespace {

constexpr std::uint64_t kDriverStream = 0;
constexpr std::uint64_t kNoiseIStream = 1;
constexpr std::uint64_t kNoiseJStream = 2;

void check_spec(const WeightMatrix& w, const SarSpec& spec) {
    if (w.standardization() != Standardization::RowStandardized) {
        throw Error(ErrorCode::InvalidArgument, "SAR simulation needs a row-standardized weight matrix");
    }
    if (!(std::abs(spec.rho) < 1.0)) {
        throw Error(ErrorCode::InvalidArgument, "|rho| must be below 1 for a row-standardized W");
    }
    if (!(spec.noise_sd > 0.0) || !std::isfinite(spec.noise_sd)) {
        throw Error(ErrorCode::InvalidArgument, "noise_sd must be positive");
    }
}

}  // namespace

std::vector<double> solve_sar(const WeightMatrix& w, double rho, std::span<const double> rhs) {
    const auto n = static_cast<Eigen::Index>(w.size());
    if (rhs.size() != w.size()) throw Error(ErrorCode::LengthMismatch, "SAR right-hand side length mismatch");
    const Eigen::Map<const Eigen::VectorXd> b(rhs.data(), n);
    Eigen::VectorXd x;

    if (w.size() <= dense_solver_limit) {
        Eigen::MatrixXd a = Eigen::MatrixXd::Identity(n, n);
        for (const Triplet& t : w.triplets()) {
            a(static_cast<Eigen::Index>(t.row), static_cast<Eigen::Index>(t.col)) -= rho * t.weight;
        }
        Eigen::PartialPivLU<Eigen::MatrixXd> lu(a);
        if (!std::isfinite(lu.rcond()) || lu.rcond() < 1e-14) {
            throw Error(ErrorCode::SingularSystem, "I - rho W is numerically singular");
        }
        x = lu.solve(b);
    } else {
        std::vector<Eigen::Triplet<double>> entries;
        entries.reserve(w.nnz() + w.size());
        for (Eigen::Index i = 0; i < n; ++i) entries.emplace_back(i, i, 1.0);
        for (const Triplet& t : w.triplets()) {
            entries.emplace_back(static_cast<Eigen::Index>(t.row), static_cast<Eigen::Index>(t.col), -rho * t.weight);
        }
        Eigen::SparseMatrix<double> a(n, n);
        a.setFromTriplets(entries.begin(), entries.end());
        Eigen::BiCGSTAB<Eigen::SparseMatrix<double>> solver;
        solver.setTolerance(1e-10);
        solver.setMaxIterations(10000);
        solver.compute(a);
        x = solver.solve(b);
        if (solver.info() != Eigen::Success) {
            throw Error(ErrorCode::SingularSystem, "iterative SAR solve did not converge");
        }
    }
    if (!x.allFinite()) throw Error(ErrorCode::SingularSystem, "SAR solve produced non-finite values");
    return {x.data(), x.data() + n};
}

std::vector<double> gaussian_noise(std::size_t n, double sd, std::uint64_t seed, std::uint64_t stream) {
    RandomStream rng(seed, stream);
    std::vector<double> out(n);
    for (double& v : out) v = sd * rng.normal();
    return out;
}

std::vector<double> simulate_sar(const WeightMatrix& w, const SarSpec& spec) {
    check_spec(w, spec);
    std::vector<double> eps = gaussian_noise(w.size(), spec.noise_sd, spec.seed, kDriverStream);
    if (spec.rho == 0.0) return eps;
    return solve_sar(w, spec.rho, eps);
}

DriverTriple simulate_common_driver(const WeightMatrix& w, const CommonDriverSpec& spec) {
    if (!(spec.noise_sd > 0.0)) throw Error(ErrorCode::InvalidArgument, "noise_sd must be positive");
    DriverTriple t;
    t.z = simulate_sar(w, spec.driver);
    plant_hotspot(t.z, spec.hotspot_sites, spec.hotspot_shift);
    t.xi = gaussian_noise(w.size(), spec.noise_sd, spec.driver.seed, kNoiseIStream);
    t.xj = gaussian_noise(w.size(), spec.noise_sd, spec.driver.seed, kNoiseJStream);
    for (std::size_t s = 0; s < w.size(); ++s) {
        t.xi[s] += spec.a * t.z[s];
        t.xj[s] += spec.b * t.z[s];
    }
    return t;
}

Lattice grid_lattice(std::size_t rows, std::size_t cols, double cell) {
    std::vector<std::string> ids;
    std::vector<SiteGeometry> geometry;
    ids.reserve(rows * cols);
    geometry.reserve(rows * cols);
    for (std::size_t r = 0; r < rows; ++r) {
        for (std::size_t c = 0; c < cols; ++c) {
            const double x0 = static_cast<double>(c) * cell;
            const double y0 = static_cast<double>(r) * cell;
            ids.push_back("r" + std::to_string(r) + "c" + std::to_string(c));
            Polygon square{{{x0, y0}, {x0 + cell, y0}, {x0 + cell, y0 + cell}, {x0, y0 + cell}}, {}};
            geometry.push_back({square});
        }
    }
    return Lattice::from_geometries(std::move(ids), std::move(geometry));
}

std::vector<std::size_t> grid_block(std::size_t rows, std::size_t cols, std::size_t row0, std::size_t col0,
                                    std::size_t height, std::size_t width) {
    if (row0 + height > rows || col0 + width > cols) {
        throw Error(ErrorCode::InvalidArgument, "hotspot block exceeds the grid");
    }
    std::vector<std::size_t> out;
    for (std::size_t r = row0; r < row0 + height; ++r) {
        for (std::size_t c = col0; c < col0 + width; ++c) out.push_back(r * cols + c);
    }
    return out;
}

void plant_hotspot(std::span<double> x, std::span<const std::size_t> sites, double shift) {
    for (std::size_t s : sites) {
        if (s >= x.size()) throw Error(ErrorCode::InvalidArgument, "hotspot site out of range");
        x[s] += shift;
    }
}

}  // namespace lattassoc
