#include "lattassoc/lattice.hpp"

#include <cmath>
#include <unordered_set>

#include "lattassoc/error.hpp"

namespace lattassoc {

namespace {

Ring normalize_ring(Ring ring) {
    if (ring.size() >= 2 && ring.front() == ring.back()) ring.pop_back();
    if (ring.size() < 3) {
        throw Error(ErrorCode::ParseError, "polygon ring needs at least 3 distinct vertices");
    }
    for (const Point& p : ring) {
        if (!std::isfinite(p.x) || !std::isfinite(p.y)) {
            throw Error(ErrorCode::ParseError, "polygon ring has a non-finite coordinate");
        }
    }
    return ring;
}

}  // namespace

RingCentroid ring_centroid(const Ring& ring) {
    const std::size_t m = ring.size();
    double twice_area = 0.0;
    double cx = 0.0;
    double cy = 0.0;
    for (std::size_t k = 0; k < m; ++k) {
        const Point& a = ring[k];
        const Point& b = ring[(k + 1) % m];
        const double cross = a.x * b.y - b.x * a.y;
        twice_area += cross;
        cx += (a.x + b.x) * cross;
        cy += (a.y + b.y) * cross;
    }
    if (twice_area == 0.0) {
        // Degenerate ring: fall back to the vertex mean.
        Point mean;
        for (const Point& p : ring) {
            mean.x += p.x;
            mean.y += p.y;
        }
        if (m > 0) {
            mean.x /= static_cast<double>(m);
            mean.y /= static_cast<double>(m);
        }
        return {mean, 0.0};
    }
    return {{cx / (3.0 * twice_area), cy / (3.0 * twice_area)}, std::abs(twice_area) / 2.0};
}

Point geometry_centroid(const SiteGeometry& geometry) {
    double total = 0.0;
    double sx = 0.0;
    double sy = 0.0;
    Point vertex_sum;
    std::size_t vertex_count = 0;
    auto accumulate = [&](const Ring& ring, double sign) {
        const RingCentroid rc = ring_centroid(ring);
        total += sign * rc.area;
        sx += sign * rc.area * rc.centroid.x;
        sy += sign * rc.area * rc.centroid.y;
        for (const Point& p : ring) {
            vertex_sum.x += p.x;
            vertex_sum.y += p.y;
        }
        vertex_count += ring.size();
    };
    for (const Polygon& part : geometry) {
        accumulate(part.exterior, 1.0);
        for (const Ring& hole : part.holes) accumulate(hole, -1.0);
    }
    if (total > 0.0) return {sx / total, sy / total};
    if (vertex_count == 0) throw Error(ErrorCode::MissingGeometry, "empty geometry");
    return {vertex_sum.x / static_cast<double>(vertex_count),
            vertex_sum.y / static_cast<double>(vertex_count)};
}

Lattice::Lattice(std::vector<Site> sites) : sites_(std::move(sites)) {
    if (sites_.size() < 2) {
        throw Error(ErrorCode::DegenerateLattice, "a lattice needs at least 2 sites");
    }
    index_.reserve(sites_.size());
    for (std::size_t i = 0; i < sites_.size(); ++i) {
        Site& site = sites_[i];
        if (site.id.empty()) {
            throw Error(ErrorCode::MissingId, "site " + std::to_string(i) + " has an empty id");
        }
        if (!index_.emplace(site.id, i).second) {
            throw Error(ErrorCode::DuplicateId, "duplicate site id '" + site.id + "'");
        }
        if (site.geometry) {
            if (site.geometry->empty()) {
                throw Error(ErrorCode::ParseError, "site '" + site.id + "' has empty geometry");
            }
            for (Polygon& part : *site.geometry) {
                part.exterior = normalize_ring(std::move(part.exterior));
                for (Ring& hole : part.holes) hole = normalize_ring(std::move(hole));
            }
        }
    }
}

Lattice Lattice::from_ids(std::vector<std::string> ids) {
    std::vector<Site> sites;
    sites.reserve(ids.size());
    for (auto& id : ids) sites.push_back({std::move(id), std::nullopt, std::nullopt});
    return Lattice(std::move(sites));
}

Lattice Lattice::from_points(std::vector<std::string> ids, std::vector<Point> points) {
    if (ids.size() != points.size()) {
        throw Error(ErrorCode::LengthMismatch, "ids and points differ in length");
    }
    std::vector<Site> sites;
    sites.reserve(ids.size());
    for (std::size_t i = 0; i < ids.size(); ++i) {
        sites.push_back({std::move(ids[i]), std::nullopt, points[i]});
    }
    return Lattice(std::move(sites));
}

Lattice Lattice::from_geometries(std::vector<std::string> ids, std::vector<SiteGeometry> geometries) {
    if (ids.size() != geometries.size()) {
        throw Error(ErrorCode::LengthMismatch, "ids and geometries differ in length");
    }
    std::vector<Site> sites;
    sites.reserve(ids.size());
    for (std::size_t i = 0; i < ids.size(); ++i) {
        sites.push_back({std::move(ids[i]), std::move(geometries[i]), std::nullopt});
    }
    return Lattice(std::move(sites));
}

std::vector<std::string> Lattice::ids() const {
    std::vector<std::string> out;
    out.reserve(sites_.size());
    for (const Site& s : sites_) out.push_back(s.id);
    return out;
}

std::optional<std::size_t> Lattice::find(std::string_view id) const {
    auto it = index_.find(std::string(id));
    if (it == index_.end()) return std::nullopt;
    return it->second;
}

std::size_t Lattice::index_of(std::string_view id) const {
    if (auto found = find(id)) return *found;
    throw Error(ErrorCode::UnknownSite, "unknown site id '" + std::string(id) + "'");
}

bool Lattice::has_all_geometry() const {
    for (const Site& s : sites_) {
        if (!s.geometry) return false;
    }
    return true;
}

const SiteGeometry& Lattice::geometry(std::size_t index) const {
    const Site& site = sites_.at(index);
    if (!site.geometry) {
        throw Error(ErrorCode::MissingGeometry, "site '" + site.id + "' has no polygon geometry");
    }
    return *site.geometry;
}

Point Lattice::centroid(std::size_t index) const {
    const Site& site = sites_.at(index);
    if (site.centroid) return *site.centroid;
    if (site.geometry) return geometry_centroid(*site.geometry);
    throw Error(ErrorCode::MissingGeometry,
                "site '" + site.id + "' has neither a centroid nor a polygon");
}

std::vector<Point> Lattice::centroids() const {
    std::vector<Point> out;
    out.reserve(sites_.size());
    for (std::size_t i = 0; i < sites_.size(); ++i) out.push_back(centroid(i));
    return out;
}

AttributeTable::AttributeTable(std::shared_ptr<const Lattice> lattice, std::vector<Variable> variables)
    : lattice_(std::move(lattice)), variables_(std::move(variables)) {
    if (!lattice_) throw Error(ErrorCode::InvalidArgument, "attribute table needs a lattice");
    if (variables_.empty()) {
        throw Error(ErrorCode::InvalidArgument, "attribute table needs at least one variable");
    }
    std::unordered_set<std::string> seen;
    for (const Variable& v : variables_) {
        if (v.name.empty()) throw Error(ErrorCode::InvalidArgument, "variable with empty name");
        if (!seen.insert(v.name).second) {
            throw Error(ErrorCode::InvalidArgument, "duplicate variable name '" + v.name + "'");
        }
        if (v.values.size() != lattice_->size()) {
            throw Error(ErrorCode::LengthMismatch,
                        "variable '" + v.name + "' has " + std::to_string(v.values.size()) +
                            " values for " + std::to_string(lattice_->size()) + " sites");
        }
        for (std::size_t i = 0; i < v.values.size(); ++i) {
            if (!std::isfinite(v.values[i])) {
                throw Error(ErrorCode::NonNumericValue, "variable '" + v.name +
                                                            "' is not finite at site '" +
                                                            lattice_->id(i) + "'");
            }
        }
    }
}

AttributeTable AttributeTable::from_rows(std::shared_ptr<const Lattice> lattice,
                                         std::span<const std::string> row_ids,
                                         std::vector<Variable> row_ordered) {
    if (!lattice) throw Error(ErrorCode::InvalidArgument, "attribute table needs a lattice");
    const std::size_t n = lattice->size();
    std::vector<std::size_t> target(row_ids.size());
    std::vector<bool> filled(n, false);
    for (std::size_t r = 0; r < row_ids.size(); ++r) {
        const auto index = lattice->find(row_ids[r]);
        if (!index) {
            throw Error(ErrorCode::UnknownSite, "row " + std::to_string(r + 1) + ": unknown site id '" +
                                                    row_ids[r] + "'");
        }
        if (filled[*index]) {
            throw Error(ErrorCode::DuplicateId, "row " + std::to_string(r + 1) +
                                                    ": site id '" + row_ids[r] + "' repeated");
        }
        filled[*index] = true;
        target[r] = *index;
    }
    for (std::size_t i = 0; i < n; ++i) {
        if (!filled[i]) {
            throw Error(ErrorCode::MissingSite, "no row for site '" + lattice->id(i) + "'");
        }
    }
    for (Variable& v : row_ordered) {
        if (v.values.size() != row_ids.size()) {
            throw Error(ErrorCode::LengthMismatch, "variable '" + v.name + "' length differs from row count");
        }
        std::vector<double> aligned(n);
        for (std::size_t r = 0; r < row_ids.size(); ++r) aligned[target[r]] = v.values[r];
        v.values = std::move(aligned);
    }
    return AttributeTable(std::move(lattice), std::move(row_ordered));
}

bool AttributeTable::contains(std::string_view name) const {
    for (const Variable& v : variables_) {
        if (v.name == name) return true;
    }
    return false;
}

const std::vector<double>& AttributeTable::variable(std::string_view name) const {
    for (const Variable& v : variables_) {
        if (v.name == name) return v.values;
    }
    throw Error(ErrorCode::UnknownVariable, "unknown variable '" + std::string(name) + "'");
}

std::vector<std::string> AttributeTable::names() const {
    std::vector<std::string> out;
    out.reserve(variables_.size());
    for (const Variable& v : variables_) out.push_back(v.name);
    return out;
}

}  // namespace lattassoc
