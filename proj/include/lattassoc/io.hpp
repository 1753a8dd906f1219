#pragma once

#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "lattassoc/global_assoc.hpp"
#include "lattassoc/inference.hpp"
#include "lattassoc/lattice.hpp"
#include "lattassoc/local_assoc.hpp"
#include "lattassoc/weights.hpp"

namespace lattassoc::io {

inline constexpr int format_version = 1;

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, std::string_view content);

// Shortest text that parses back to the same double.
std::string format_number(double value);

// Decimal or scientific notation only ("1", "-2.5", "3e-4"); nullopt otherwise.
std::optional<double> parse_number(std::string_view text);

// --- GeoJSON -----------------------------------------------------------------

// FeatureCollection of Polygon / MultiPolygon (or Point) features, each with a
// string-convertible `id` property. Sites keep file order.
Lattice parse_geojson(std::string_view text);
Lattice read_geojson(const std::string& path);

std::string format_geojson(const Lattice& lattice);

// Adds lisa_value, lisa_p, lisa_class to each feature's properties; all other
// content is kept as is, including key order.
std::string enrich_geojson(std::string_view text, const Lattice& lattice, const SignificanceMap& map);

// --- CSV attributes ------------------------------------------------------------

// Header `id,<var1>,<var2>,...`; every lattice id exactly once, any row order.
AttributeTable parse_attributes(std::string_view text, std::shared_ptr<const Lattice> lattice);
AttributeTable read_attributes(const std::string& path, std::shared_ptr<const Lattice> lattice);

std::string format_attributes(const Lattice& lattice, const std::vector<std::string>& names,
                              const std::vector<std::vector<double>>& columns);

// --- GAL / GWT -----------------------------------------------------------------

struct WeightsFile {
    std::vector<std::string> ids;  // order of first appearance
    std::vector<Triplet> entries;  // indices into ids
};

WeightsFile parse_gal(std::string_view text);
WeightsFile parse_gwt(std::string_view text);

// Maps file ids onto lattice indices. Binary unless the weights are not all 1,
// in which case rows must already sum to 1 (within 1e-6; renormalized).
WeightMatrix align_weights(const WeightsFile& file, const Lattice& lattice);

// Lattice made of the ids a GAL file lists, in file order.
Lattice lattice_from_weights(const WeightsFile& file);

std::string format_gal(const WeightMatrix& w, const Lattice& lattice, std::string_view name = "lattice");
std::string format_gwt(const WeightMatrix& w, const Lattice& lattice, std::string_view name = "lattice");

// --- results -------------------------------------------------------------------

std::string format_result_json(const AssocResult& result);

// id,value,expected,island
std::string format_local_csv(const Lattice& lattice, const LocalAssocMap& map);

// id,value,z_value,z_lag,pseudo_p,class
std::string format_significance_csv(const Lattice& lattice, const SignificanceMap& map);

}  // namespace lattassoc::io
