#pragma once

#include <cstddef>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

namespace lattassoc {

// Planar coordinates; no geodesic handling anywhere in the library.
struct Point {
    double x = 0.0;
    double y = 0.0;

    friend bool operator==(const Point&, const Point&) = default;
};

// Rings are stored open: the closing vertex (== first) is dropped on input.
using Ring = std::vector<Point>;

struct Polygon {
    Ring exterior;
    std::vector<Ring> holes;
};

// One or more polygon parts per site (MultiPolygon support).
using SiteGeometry = std::vector<Polygon>;

struct RingCentroid {
    Point centroid;
    double area = 0.0;  // absolute shoelace area
};

RingCentroid ring_centroid(const Ring& ring);

// Area-weighted centroid over all parts; holes subtract their area.
Point geometry_centroid(const SiteGeometry& geometry);

/// The set of sites. Site order is fixed at construction and defines the
/// index 0..n-1 used by every matrix and vector in the library.
class Lattice {
public:
    struct Site {
        std::string id;
        std::optional<SiteGeometry> geometry;
        std::optional<Point> centroid;
    };

    explicit Lattice(std::vector<Site> sites);

    static Lattice from_ids(std::vector<std::string> ids);
    static Lattice from_points(std::vector<std::string> ids, std::vector<Point> points);
    static Lattice from_geometries(std::vector<std::string> ids, std::vector<SiteGeometry> geometries);

    std::size_t size() const noexcept { return sites_.size(); }
    const std::string& id(std::size_t index) const { return sites_.at(index).id; }
    std::vector<std::string> ids() const;

    std::optional<std::size_t> find(std::string_view id) const;
    std::size_t index_of(std::string_view id) const;  // throws UnknownSite

    bool has_geometry(std::size_t index) const { return sites_.at(index).geometry.has_value(); }
    bool has_all_geometry() const;
    const SiteGeometry& geometry(std::size_t index) const;  // throws MissingGeometry

    // Stored centroid if present, otherwise derived from the polygon geometry.
    Point centroid(std::size_t index) const;
    Point centroid(std::string_view id) const { return centroid(index_of(id)); }
    std::vector<Point> centroids() const;

private:
    std::vector<Site> sites_;
    std::unordered_map<std::string, std::size_t> index_;
};

/// d named real-valued variables over the n sites of a lattice, stored in
/// lattice site order.
class AttributeTable {
public:
    struct Variable {
        std::string name;
        std::vector<double> values;
    };

    AttributeTable(std::shared_ptr<const Lattice> lattice, std::vector<Variable> variables);

    // Rows may arrive in any order; values are realigned to lattice order.
    static AttributeTable from_rows(std::shared_ptr<const Lattice> lattice,
                                    std::span<const std::string> row_ids,
                                    std::vector<Variable> row_ordered);

    const Lattice& lattice() const noexcept { return *lattice_; }
    std::shared_ptr<const Lattice> lattice_ptr() const noexcept { return lattice_; }
    std::size_t sites() const noexcept { return lattice_->size(); }
    std::size_t dimension() const noexcept { return variables_.size(); }

    bool contains(std::string_view name) const;
    const std::vector<double>& variable(std::string_view name) const;  // throws UnknownVariable
    std::vector<std::string> names() const;
    const std::vector<Variable>& variables() const noexcept { return variables_; }

private:
    std::shared_ptr<const Lattice> lattice_;
    std::vector<Variable> variables_;
};

}  // namespace lattassoc
