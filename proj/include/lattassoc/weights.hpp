#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "lattassoc/kernels.hpp"
#include "lattassoc/lattice.hpp"

namespace lattassoc {

enum class Standardization { Binary, RowStandardized };

struct Triplet {
    std::size_t row = 0;
    std::size_t col = 0;
    double weight = 1.0;
};

/// Sparse n x n proximity matrix in CSR form. Immutable once built.
///
/// Invariants: no diagonal entries; Binary matrices store only 1.0;
/// RowStandardized matrices have every nonempty row summing to 1 (1e-12).
class WeightMatrix {
public:
    WeightMatrix() = default;

    static WeightMatrix from_triplets(std::size_t n, std::vector<Triplet> triplets,
                                      Standardization mode = Standardization::Binary);

    std::size_t size() const noexcept { return n_; }
    std::size_t nnz() const noexcept { return cols_.size(); }
    Standardization standardization() const noexcept { return mode_; }
    bool symmetric() const noexcept { return symmetric_; }
    bool empty() const noexcept { return cols_.empty(); }

    std::span<const std::size_t> neighbors(std::size_t i) const {
        return {cols_.data() + row_ptr_[i], row_ptr_[i + 1] - row_ptr_[i]};
    }
    std::span<const double> row_weights(std::size_t i) const {
        return {vals_.data() + row_ptr_[i], row_ptr_[i + 1] - row_ptr_[i]};
    }
    std::size_t degree(std::size_t i) const { return row_ptr_[i + 1] - row_ptr_[i]; }
    bool is_island(std::size_t i) const { return degree(i) == 0; }
    double row_sum(std::size_t i) const;
    double weight(std::size_t i, std::size_t j) const;  // 0 when absent

    // S0 = sum_i sum_j w_ij
    double s0() const;

    std::vector<Triplet> triplets() const;
    kernels::CsrView view() const noexcept { return {n_, row_ptr_, cols_, vals_}; }

private:
    std::size_t n_ = 0;
    std::vector<std::size_t> row_ptr_{0};
    std::vector<std::size_t> cols_;
    std::vector<double> vals_;
    Standardization mode_ = Standardization::Binary;
    bool symmetric_ = true;
};

/// Neighbour criterion. `order > 1` wraps the base criterion in a
/// higher-order (exclusive) neighbourhood.
struct NeighborSpec {
    enum class Method { QueenContiguity, RookContiguity, KNearest, DistanceThreshold, DistanceBand };

    Method method = Method::QueenContiguity;
    std::size_t k = 0;
    double threshold = 0.0;
    double band_lower = 0.0;
    double band_upper = 0.0;
    std::size_t order = 1;

    static NeighborSpec queen() { return {}; }
    static NeighborSpec rook() { return {Method::RookContiguity}; }
    static NeighborSpec knearest(std::size_t k) { return {Method::KNearest, k}; }
    static NeighborSpec distance_threshold(double d) { return {Method::DistanceThreshold, 0, d}; }
    static NeighborSpec distance_band(double lower, double upper) {
        return {Method::DistanceBand, 0, 0.0, lower, upper};
    }
    NeighborSpec with_order(std::size_t o) const {
        NeighborSpec copy = *this;
        copy.order = o;
        return copy;
    }

    void validate() const;
    std::string describe() const;
};

struct BuildOptions {
    // Contiguity snapping distance; 0 means exact coordinate matching.
    double snap_tolerance = 0.0;
    // Raise DegenerateLattice when the result has no entries.
    bool strict = false;
};

WeightMatrix build_weights(const Lattice& lattice, const NeighborSpec& spec, const BuildOptions& options = {});

// Sites reachable in exactly `order` steps and in no fewer, excluding self.
WeightMatrix higher_order(const WeightMatrix& w, std::size_t order);

WeightMatrix row_standardize(const WeightMatrix& w);

// w'_ij = max(w_ij, w_ji)
WeightMatrix symmetrize_union(const WeightMatrix& w);

std::vector<double> spatial_lag(const WeightMatrix& w, std::span<const double> x);

}  // namespace lattassoc
