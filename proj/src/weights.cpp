#include "lattassoc/weights.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>
#include <sstream>
#include <utility>

#include "lattassoc/error.hpp"

namespace lattassoc {

namespace {

constexpr double kRowSumTolerance = 1e-12;

struct Segment {
    Point a;
    Point b;
};

struct Box {
    double min_x = std::numeric_limits<double>::infinity();
    double min_y = std::numeric_limits<double>::infinity();
    double max_x = -std::numeric_limits<double>::infinity();
    double max_y = -std::numeric_limits<double>::infinity();

    void extend(const Point& p) {
        min_x = std::min(min_x, p.x);
        min_y = std::min(min_y, p.y);
        max_x = std::max(max_x, p.x);
        max_y = std::max(max_y, p.y);
    }
};

struct SiteOutline {
    std::vector<Segment> segments;
    Box box;
};

SiteOutline outline_of(const SiteGeometry& geometry) {
    SiteOutline out;
    auto add_ring = [&](const Ring& ring) {
        for (std::size_t k = 0; k < ring.size(); ++k) {
            const Point& a = ring[k];
            const Point& b = ring[(k + 1) % ring.size()];
            out.segments.push_back({a, b});
            out.box.extend(a);
        }
    };
    for (const Polygon& part : geometry) {
        add_ring(part.exterior);
        for (const Ring& hole : part.holes) add_ring(hole);
    }
    return out;
}

double orient(const Point& p, const Point& q, const Point& r) {
    return (q.x - p.x) * (r.y - p.y) - (q.y - p.y) * (r.x - p.x);
}

int sign_of(double v) { return (v > 0.0) - (v < 0.0); }

bool within_box(const Point& p, const Segment& s) {
    return std::min(s.a.x, s.b.x) <= p.x && p.x <= std::max(s.a.x, s.b.x) &&
           std::min(s.a.y, s.b.y) <= p.y && p.y <= std::max(s.a.y, s.b.y);
}

bool segments_touch_exact(const Segment& s, const Segment& t) {
    const int o1 = sign_of(orient(s.a, s.b, t.a));
    const int o2 = sign_of(orient(s.a, s.b, t.b));
    const int o3 = sign_of(orient(t.a, t.b, s.a));
    const int o4 = sign_of(orient(t.a, t.b, s.b));
    if (o1 != o2 && o3 != o4) return true;
    if (o1 == 0 && within_box(t.a, s)) return true;
    if (o2 == 0 && within_box(t.b, s)) return true;
    if (o3 == 0 && within_box(s.a, t)) return true;
    if (o4 == 0 && within_box(s.b, t)) return true;
    return false;
}

double point_segment_distance(const Point& p, const Segment& s) {
    const double dx = s.b.x - s.a.x;
    const double dy = s.b.y - s.a.y;
    const double len2 = dx * dx + dy * dy;
    double t = 0.0;
    if (len2 > 0.0) t = std::clamp(((p.x - s.a.x) * dx + (p.y - s.a.y) * dy) / len2, 0.0, 1.0);
    return std::hypot(p.x - (s.a.x + t * dx), p.y - (s.a.y + t * dy));
}

bool segments_touch(const Segment& s, const Segment& t, double tol) {
    if (segments_touch_exact(s, t)) return true;
    if (tol <= 0.0) return false;
    return point_segment_distance(s.a, t) <= tol || point_segment_distance(s.b, t) <= tol ||
           point_segment_distance(t.a, s) <= tol || point_segment_distance(t.b, s) <= tol;
}

// Length of the collinear overlap of two segments, 0 if not collinear.
double collinear_overlap(const Segment& s, const Segment& t, double tol) {
    const double dx = s.b.x - s.a.x;
    const double dy = s.b.y - s.a.y;
    const double len = std::hypot(dx, dy);
    if (len == 0.0) return 0.0;
    if (tol <= 0.0) {
        if (orient(s.a, s.b, t.a) != 0.0 || orient(s.a, s.b, t.b) != 0.0) return 0.0;
    } else {
        if (std::abs(orient(s.a, s.b, t.a)) / len > tol || std::abs(orient(s.a, s.b, t.b)) / len > tol) {
            return 0.0;
        }
    }
    const double ux = dx / len;
    const double uy = dy / len;
    const double t0 = (t.a.x - s.a.x) * ux + (t.a.y - s.a.y) * uy;
    const double t1 = (t.b.x - s.a.x) * ux + (t.b.y - s.a.y) * uy;
    const double lo = std::max(0.0, std::min(t0, t1));
    const double hi = std::min(len, std::max(t0, t1));
    return std::max(0.0, hi - lo);
}

bool sites_adjacent(const SiteOutline& p, const SiteOutline& q, bool rook, double tol) {
    for (const Segment& s : p.segments) {
        for (const Segment& t : q.segments) {
            if (rook) {
                if (collinear_overlap(s, t, tol) > tol) return true;
            } else if (segments_touch(s, t, tol)) {
                return true;
            }
        }
    }
    return false;
}

WeightMatrix contiguity(const Lattice& lattice, bool rook, const BuildOptions& options) {
    const std::size_t n = lattice.size();
    std::vector<SiteOutline> outlines(n);
    for (std::size_t i = 0; i < n; ++i) outlines[i] = outline_of(lattice.geometry(i));

    const double tol = options.snap_tolerance;
    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (outlines[a].box.min_x != outlines[b].box.min_x) return outlines[a].box.min_x < outlines[b].box.min_x;
        return a < b;
    });

    std::vector<std::pair<std::size_t, std::size_t>> candidates;
    for (std::size_t p = 0; p < n; ++p) {
        const Box& bp = outlines[order[p]].box;
        for (std::size_t q = p + 1; q < n; ++q) {
            const Box& bq = outlines[order[q]].box;
            if (bq.min_x > bp.max_x + tol) break;
            if (bq.min_y > bp.max_y + tol || bp.min_y > bq.max_y + tol) continue;
            const std::size_t a = std::min(order[p], order[q]);
            const std::size_t b = std::max(order[p], order[q]);
            candidates.emplace_back(a, b);
        }
    }
    std::sort(candidates.begin(), candidates.end());

    std::vector<char> linked(candidates.size(), 0);
    const auto count = static_cast<std::ptrdiff_t>(candidates.size());
#pragma omp parallel for schedule(dynamic, 16)
    for (std::ptrdiff_t c = 0; c < count; ++c) {
        const auto [a, b] = candidates[c];
        linked[c] = sites_adjacent(outlines[a], outlines[b], rook, tol) ? 1 : 0;
    }

    std::vector<Triplet> triplets;
    for (std::size_t c = 0; c < candidates.size(); ++c) {
        if (!linked[c]) continue;
        triplets.push_back({candidates[c].first, candidates[c].second, 1.0});
        triplets.push_back({candidates[c].second, candidates[c].first, 1.0});
    }
    return WeightMatrix::from_triplets(n, std::move(triplets));
}

// Row-parallel distance scan; `keep(i, j, d)` decides each pair.
template <typename Keep>
WeightMatrix distance_scan(const std::vector<Point>& pts, Keep keep) {
    const std::size_t n = pts.size();
    std::vector<std::vector<std::size_t>> rows(n);
    const auto sn = static_cast<std::ptrdiff_t>(n);
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < sn; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            if (j == static_cast<std::size_t>(i)) continue;
            const double d = std::hypot(pts[i].x - pts[j].x, pts[i].y - pts[j].y);
            if (keep(d)) rows[i].push_back(j);
        }
    }
    std::vector<Triplet> triplets;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j : rows[i]) triplets.push_back({i, j, 1.0});
    }
    return WeightMatrix::from_triplets(n, std::move(triplets));
}

WeightMatrix knearest(const std::vector<Point>& pts, std::size_t k) {
    const std::size_t n = pts.size();
    if (k == 0 || k >= n) {
        throw Error(ErrorCode::InvalidArgument,
                    "k-nearest needs 1 <= k <= n-1 (k=" + std::to_string(k) + ", n=" + std::to_string(n) + ")");
    }
    std::vector<std::vector<std::size_t>> rows(n);
    const auto sn = static_cast<std::ptrdiff_t>(n);
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < sn; ++i) {
        std::vector<std::pair<double, std::size_t>> dist;
        dist.reserve(n - 1);
        for (std::size_t j = 0; j < n; ++j) {
            if (j == static_cast<std::size_t>(i)) continue;
            dist.emplace_back(std::hypot(pts[i].x - pts[j].x, pts[i].y - pts[j].y), j);
        }
        // Ties in distance break by ascending site index (pair ordering).
        std::partial_sort(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(k), dist.end());
        for (std::size_t t = 0; t < k; ++t) rows[i].push_back(dist[t].second);
    }
    std::vector<Triplet> triplets;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j : rows[i]) triplets.push_back({i, j, 1.0});
    }
    return WeightMatrix::from_triplets(n, std::move(triplets));
}

void require_binary(const WeightMatrix& w, const char* what) {
    if (w.standardization() != Standardization::Binary) {
        throw Error(ErrorCode::InvalidArgument, std::string(what) + " needs a binary weight matrix");
    }
}

}  // namespace

WeightMatrix WeightMatrix::from_triplets(std::size_t n, std::vector<Triplet> triplets, Standardization mode) {
    for (const Triplet& t : triplets) {
        if (t.row >= n || t.col >= n) {
            throw Error(ErrorCode::InvalidArgument, "weight entry index out of range");
        }
        if (t.row == t.col) throw Error(ErrorCode::InvalidArgument, "diagonal weights must be zero");
        if (!std::isfinite(t.weight) || t.weight < 0.0) {
            throw Error(ErrorCode::InvalidArgument, "weights must be finite and nonnegative");
        }
        if (mode == Standardization::Binary && t.weight != 1.0 && t.weight != 0.0) {
            throw Error(ErrorCode::InvalidArgument, "binary weight matrix holds a non-unit weight");
        }
    }
    std::erase_if(triplets, [](const Triplet& t) { return t.weight == 0.0; });
    std::sort(triplets.begin(), triplets.end(), [](const Triplet& a, const Triplet& b) {
        return a.row != b.row ? a.row < b.row : a.col < b.col;
    });
    for (std::size_t k = 1; k < triplets.size(); ++k) {
        if (triplets[k].row == triplets[k - 1].row && triplets[k].col == triplets[k - 1].col) {
            throw Error(ErrorCode::InvalidArgument, "duplicate weight entry");
        }
    }

    WeightMatrix w;
    w.n_ = n;
    w.mode_ = mode;
    w.row_ptr_.assign(n + 1, 0);
    w.cols_.reserve(triplets.size());
    w.vals_.reserve(triplets.size());
    for (const Triplet& t : triplets) {
        ++w.row_ptr_[t.row + 1];
        w.cols_.push_back(t.col);
        w.vals_.push_back(t.weight);
    }
    for (std::size_t i = 0; i < n; ++i) w.row_ptr_[i + 1] += w.row_ptr_[i];

    if (mode == Standardization::RowStandardized) {
        for (std::size_t i = 0; i < n; ++i) {
            if (w.degree(i) > 0 && std::abs(w.row_sum(i) - 1.0) > kRowSumTolerance) {
                throw Error(ErrorCode::InvalidArgument,
                            "row " + std::to_string(i) + " of a row-standardized matrix does not sum to 1");
            }
        }
    }

    w.symmetric_ = true;
    for (std::size_t i = 0; i < n && w.symmetric_; ++i) {
        auto cols = w.neighbors(i);
        auto vals = w.row_weights(i);
        for (std::size_t e = 0; e < cols.size(); ++e) {
            if (w.weight(cols[e], i) != vals[e]) {
                w.symmetric_ = false;
                break;
            }
        }
    }
    return w;
}

double WeightMatrix::row_sum(std::size_t i) const {
    double s = 0.0;
    for (double v : row_weights(i)) s += v;
    return s;
}

double WeightMatrix::weight(std::size_t i, std::size_t j) const {
    auto cols = neighbors(i);
    auto it = std::lower_bound(cols.begin(), cols.end(), j);
    if (it == cols.end() || *it != j) return 0.0;
    return vals_[row_ptr_[i] + static_cast<std::size_t>(it - cols.begin())];
}

double WeightMatrix::s0() const { return kernels::pairwise_sum(vals_); }

std::vector<Triplet> WeightMatrix::triplets() const {
    std::vector<Triplet> out;
    out.reserve(nnz());
    for (std::size_t i = 0; i < n_; ++i) {
        for (std::size_t e = row_ptr_[i]; e < row_ptr_[i + 1]; ++e) out.push_back({i, cols_[e], vals_[e]});
    }
    return out;
}

void NeighborSpec::validate() const {
    switch (method) {
        case Method::KNearest:
            if (k == 0) throw Error(ErrorCode::InvalidArgument, "k-nearest needs k >= 1");
            break;
        case Method::DistanceThreshold:
            if (!(threshold > 0.0) || !std::isfinite(threshold)) {
                throw Error(ErrorCode::InvalidArgument, "distance threshold must be positive");
            }
            break;
        case Method::DistanceBand:
            if (!(band_lower >= 0.0) || !(band_upper > 0.0) || !std::isfinite(band_upper)) {
                throw Error(ErrorCode::InvalidArgument, "distance band bounds must be nonnegative and finite");
            }
            if (!(band_lower < band_upper)) {
                throw Error(ErrorCode::InvalidArgument, "distance band needs lower < upper");
            }
            break;
        case Method::QueenContiguity:
        case Method::RookContiguity:
            break;
    }
    if (order == 0) throw Error(ErrorCode::InvalidArgument, "neighbour order must be >= 1");
}

std::string NeighborSpec::describe() const {
    std::ostringstream out;
    out.precision(17);
    switch (method) {
        case Method::QueenContiguity: out << "queen"; break;
        case Method::RookContiguity: out << "rook"; break;
        case Method::KNearest: out << "knn:" << k; break;
        case Method::DistanceThreshold: out << "dist:" << threshold; break;
        case Method::DistanceBand: out << "band:" << band_lower << ',' << band_upper; break;
    }
    if (order > 1) out << " order " << order;
    return out.str();
}

WeightMatrix build_weights(const Lattice& lattice, const NeighborSpec& spec, const BuildOptions& options) {
    spec.validate();
    WeightMatrix w;
    switch (spec.method) {
        case NeighborSpec::Method::QueenContiguity: w = contiguity(lattice, false, options); break;
        case NeighborSpec::Method::RookContiguity: w = contiguity(lattice, true, options); break;
        case NeighborSpec::Method::KNearest: w = knearest(lattice.centroids(), spec.k); break;
        case NeighborSpec::Method::DistanceThreshold: {
            const double limit = spec.threshold;
            w = distance_scan(lattice.centroids(), [limit](double d) { return d <= limit; });
            break;
        }
        case NeighborSpec::Method::DistanceBand: {
            const double lo = spec.band_lower;
            const double hi = spec.band_upper;
            w = distance_scan(lattice.centroids(), [lo, hi](double d) { return lo <= d && d < hi; });
            break;
        }
    }
    if (spec.order > 1) w = higher_order(w, spec.order);
    if (options.strict && w.empty()) {
        throw Error(ErrorCode::DegenerateLattice, "weights '" + spec.describe() + "' produced no neighbour pairs");
    }
    return w;
}

WeightMatrix higher_order(const WeightMatrix& w, std::size_t order) {
    require_binary(w, "higher_order");
    if (order == 0) throw Error(ErrorCode::InvalidArgument, "neighbour order must be >= 1");
    const std::size_t n = w.size();
    std::vector<std::vector<std::size_t>> rows(n);
    const auto sn = static_cast<std::ptrdiff_t>(n);
#pragma omp parallel
    {
        std::vector<std::size_t> depth(n);
        constexpr std::size_t unseen = std::numeric_limits<std::size_t>::max();
#pragma omp for schedule(dynamic, 16)
        for (std::ptrdiff_t si = 0; si < sn; ++si) {
            const auto source = static_cast<std::size_t>(si);
            std::fill(depth.begin(), depth.end(), unseen);
            depth[source] = 0;
            std::queue<std::size_t> frontier;
            frontier.push(source);
            while (!frontier.empty()) {
                const std::size_t u = frontier.front();
                frontier.pop();
                if (depth[u] == order) continue;
                for (std::size_t v : w.neighbors(u)) {
                    if (depth[v] != unseen) continue;
                    depth[v] = depth[u] + 1;
                    frontier.push(v);
                }
            }
            for (std::size_t v = 0; v < n; ++v) {
                if (depth[v] == order) rows[source].push_back(v);
            }
        }
    }
    std::vector<Triplet> triplets;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j : rows[i]) triplets.push_back({i, j, 1.0});
    }
    return WeightMatrix::from_triplets(n, std::move(triplets));
}

WeightMatrix row_standardize(const WeightMatrix& w) {
    std::vector<Triplet> triplets = w.triplets();
    std::vector<double> sums(w.size(), 0.0);
    for (std::size_t i = 0; i < w.size(); ++i) sums[i] = w.row_sum(i);
    for (Triplet& t : triplets) t.weight /= sums[t.row];
    return WeightMatrix::from_triplets(w.size(), std::move(triplets), Standardization::RowStandardized);
}

WeightMatrix symmetrize_union(const WeightMatrix& w) {
    require_binary(w, "symmetrize_union");
    std::vector<Triplet> triplets = w.triplets();
    const std::size_t base = triplets.size();
    for (std::size_t k = 0; k < base; ++k) {
        const Triplet& t = triplets[k];
        if (w.weight(t.col, t.row) == 0.0) triplets.push_back({t.col, t.row, 1.0});
    }
    return WeightMatrix::from_triplets(w.size(), std::move(triplets));
}

std::vector<double> spatial_lag(const WeightMatrix& w, std::span<const double> x) {
    if (x.size() != w.size()) {
        throw Error(ErrorCode::LengthMismatch, "spatial_lag: vector length " + std::to_string(x.size()) +
                                                   " does not match " + std::to_string(w.size()) + " sites");
    }
    std::vector<double> out(w.size());
    kernels::parallel::spatial_lag(w.view(), x, out);
    return out;
}

}  // namespace lattassoc
