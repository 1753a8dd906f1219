#include "lattassoc/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <json.hpp>
#include <sstream>
#include <unordered_map>

#include "lattassoc/error.hpp"

namespace lattassoc::io {

using nlohmann::ordered_json;

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

std::vector<std::string_view> split_lines(std::string_view text) {
    std::vector<std::string_view> lines;
    std::size_t start = 0;
    while (start <= text.size()) {
        std::size_t end = text.find('\n', start);
        if (end == std::string_view::npos) end = text.size();
        std::string_view line = text.substr(start, end - start);
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        lines.push_back(line);
        start = end + 1;
    }
    while (!lines.empty() && trim(lines.back()).empty()) lines.pop_back();
    return lines;
}

std::vector<std::string> split_csv(std::string_view line) {
    std::vector<std::string> fields;
    std::string current;
    bool quoted = false;
    for (std::size_t k = 0; k < line.size(); ++k) {
        const char c = line[k];
        if (quoted) {
            if (c == '"' && k + 1 < line.size() && line[k + 1] == '"') {
                current.push_back('"');
                ++k;
            } else if (c == '"') {
                quoted = false;
            } else {
                current.push_back(c);
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            fields.emplace_back(trim(current));
            current.clear();
        } else {
            current.push_back(c);
        }
    }
    fields.emplace_back(trim(current));
    return fields;
}

std::vector<std::string_view> split_ws(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t k = 0;
    while (k < line.size()) {
        while (k < line.size() && std::isspace(static_cast<unsigned char>(line[k]))) ++k;
        const std::size_t start = k;
        while (k < line.size() && !std::isspace(static_cast<unsigned char>(line[k]))) ++k;
        if (k > start) out.push_back(line.substr(start, k - start));
    }
    return out;
}

std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out.push_back('"');
        out.push_back(c);
    }
    out.push_back('"');
    return out;
}

std::string id_from_json(const ordered_json& value) {
    if (value.is_string()) return value.get<std::string>();
    if (value.is_number_integer()) return value.dump();
    if (value.is_number_float()) return format_number(value.get<double>());
    return {};
}

Ring parse_ring(const ordered_json& coords, std::size_t feature) {
    if (!coords.is_array()) {
        throw Error(ErrorCode::ParseError, "feature " + std::to_string(feature) + ": ring is not an array");
    }
    Ring ring;
    for (const auto& pos : coords) {
        if (!pos.is_array() || pos.size() < 2 || !pos[0].is_number() || !pos[1].is_number()) {
            throw Error(ErrorCode::ParseError, "feature " + std::to_string(feature) + ": bad coordinate");
        }
        ring.push_back({pos[0].get<double>(), pos[1].get<double>()});
    }
    if (ring.size() < 4 || !(ring.front() == ring.back())) {
        throw Error(ErrorCode::ParseError, "feature " + std::to_string(feature) + ": polygon ring is not closed");
    }
    return ring;
}

Polygon parse_polygon(const ordered_json& rings, std::size_t feature) {
    if (!rings.is_array() || rings.empty()) {
        throw Error(ErrorCode::ParseError, "feature " + std::to_string(feature) + ": empty polygon");
    }
    Polygon poly;
    poly.exterior = parse_ring(rings[0], feature);
    for (std::size_t k = 1; k < rings.size(); ++k) poly.holes.push_back(parse_ring(rings[k], feature));
    return poly;
}

ordered_json parse_json_text(std::string_view text) {
    try {
        return ordered_json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::ParseError, std::string("invalid JSON: ") + e.what());
    }
}

const ordered_json& features_of(const ordered_json& doc) {
    if (!doc.is_object() || doc.value("type", "") != "FeatureCollection" || !doc.contains("features") ||
        !doc["features"].is_array()) {
        throw Error(ErrorCode::ParseError, "GeoJSON input must be a FeatureCollection");
    }
    return doc["features"];
}

ordered_json number_or_null(std::optional<double> v) {
    if (!v || !std::isfinite(*v)) return nullptr;
    return *v;
}

}  // namespace

std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::IoError, "cannot open '" + path + "' for reading");
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

void write_text_file(const std::string& path, std::string_view content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::IoError, "cannot open '" + path + "' for writing");
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw Error(ErrorCode::IoError, "failed writing '" + path + "'");
}

std::string format_number(double value) {
    if (std::isnan(value)) return "NA";
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), value);
    return std::string(buf, res.ptr);
}

std::optional<double> parse_number(std::string_view text) {
    text = trim(text);
    if (text.empty()) return std::nullopt;
    bool digit = false;
    for (char c : text) {
        if (c >= '0' && c <= '9') {
            digit = true;
        } else if (c != '+' && c != '-' && c != '.' && c != 'e' && c != 'E') {
            return std::nullopt;
        }
    }
    if (!digit) return std::nullopt;
    if (text.front() == '+') text.remove_prefix(1);
    double value = 0.0;
    const auto res = std::from_chars(text.data(), text.data() + text.size(), value, std::chars_format::general);
    if (res.ec != std::errc() || res.ptr != text.data() + text.size() || !std::isfinite(value)) {
        return std::nullopt;
    }
    return value;
}

Lattice parse_geojson(std::string_view text) {
    const ordered_json doc = parse_json_text(text);
    const ordered_json& features = features_of(doc);
    std::vector<Lattice::Site> sites;
    sites.reserve(features.size());
    for (std::size_t f = 0; f < features.size(); ++f) {
        const ordered_json& feature = features[f];
        if (!feature.is_object()) throw Error(ErrorCode::ParseError, "feature " + std::to_string(f) + " is not an object");
        std::string id;
        if (feature.contains("properties") && feature["properties"].is_object() &&
            feature["properties"].contains("id")) {
            id = id_from_json(feature["properties"]["id"]);
        }
        if (id.empty()) throw Error(ErrorCode::MissingId, "feature " + std::to_string(f) + " has no 'id' property");

        Lattice::Site site{id, std::nullopt, std::nullopt};
        if (feature.contains("geometry") && !feature["geometry"].is_null()) {
            const ordered_json& geom = feature["geometry"];
            const std::string type = geom.value("type", "");
            if (!geom.contains("coordinates")) {
                throw Error(ErrorCode::ParseError, "feature " + std::to_string(f) + ": geometry lacks coordinates");
            }
            const ordered_json& coords = geom["coordinates"];
            if (type == "Polygon") {
                site.geometry = SiteGeometry{parse_polygon(coords, f)};
            } else if (type == "MultiPolygon") {
                SiteGeometry parts;
                if (!coords.is_array()) throw Error(ErrorCode::ParseError, "bad MultiPolygon");
                for (const auto& poly : coords) parts.push_back(parse_polygon(poly, f));
                site.geometry = std::move(parts);
            } else if (type == "Point") {
                if (!coords.is_array() || coords.size() < 2 || !coords[0].is_number() || !coords[1].is_number()) {
                    throw Error(ErrorCode::ParseError, "feature " + std::to_string(f) + ": bad Point");
                }
                site.centroid = Point{coords[0].get<double>(), coords[1].get<double>()};
            } else {
                throw Error(ErrorCode::ParseError,
                            "feature " + std::to_string(f) + ": unsupported geometry type '" + type + "'");
            }
        }
        sites.push_back(std::move(site));
    }
    return Lattice(std::move(sites));
}

Lattice read_geojson(const std::string& path) { return parse_geojson(read_text_file(path)); }

std::string format_geojson(const Lattice& lattice) {
    ordered_json features = ordered_json::array();
    for (std::size_t i = 0; i < lattice.size(); ++i) {
        ordered_json feature;
        feature["type"] = "Feature";
        feature["properties"] = {{"id", lattice.id(i)}};
        if (lattice.has_geometry(i)) {
            auto ring_json = [](const Ring& ring) {
                ordered_json r = ordered_json::array();
                for (const Point& p : ring) r.push_back({p.x, p.y});
                r.push_back({ring.front().x, ring.front().y});
                return r;
            };
            ordered_json parts = ordered_json::array();
            for (const Polygon& poly : lattice.geometry(i)) {
                ordered_json rings = ordered_json::array();
                rings.push_back(ring_json(poly.exterior));
                for (const Ring& hole : poly.holes) rings.push_back(ring_json(hole));
                parts.push_back(rings);
            }
            if (parts.size() == 1) {
                feature["geometry"] = {{"type", "Polygon"}, {"coordinates", parts[0]}};
            } else {
                feature["geometry"] = {{"type", "MultiPolygon"}, {"coordinates", parts}};
            }
        } else {
            const Point c = lattice.centroid(i);
            feature["geometry"] = {{"type", "Point"}, {"coordinates", {c.x, c.y}}};
        }
        features.push_back(std::move(feature));
    }
    ordered_json doc;
    doc["type"] = "FeatureCollection";
    doc["features"] = std::move(features);
    return doc.dump() + "\n";
}

std::string enrich_geojson(std::string_view text, const Lattice& lattice, const SignificanceMap& map) {
    ordered_json doc = parse_json_text(text);
    features_of(doc);
    ordered_json& features = doc["features"];
    if (features.size() != lattice.size() || map.sites.size() != lattice.size()) {
        throw Error(ErrorCode::LengthMismatch, "GeoJSON feature count does not match the lattice");
    }
    for (std::size_t f = 0; f < features.size(); ++f) {
        ordered_json& feature = features[f];
        if (!feature.contains("properties") || feature["properties"].is_null()) {
            feature["properties"] = ordered_json::object();
        }
        ordered_json& props = feature["properties"];
        if (id_from_json(props.value("id", ordered_json())) != lattice.id(f)) {
            throw Error(ErrorCode::UnknownSite, "GeoJSON feature " + std::to_string(f) + " does not match site '" +
                                                    lattice.id(f) + "'");
        }
        const SiteSignificance& s = map.sites[f];
        const bool island = s.quadrant == Quadrant::Island;
        props["lisa_value"] = island ? ordered_json(nullptr) : ordered_json(s.value);
        props["lisa_p"] = number_or_null(s.pseudo_p);
        props["lisa_class"] = to_string(s.quadrant);
    }
    return doc.dump() + "\n";
}

AttributeTable parse_attributes(std::string_view text, std::shared_ptr<const Lattice> lattice) {
    const auto lines = split_lines(text);
    if (lines.empty()) throw Error(ErrorCode::ParseError, "attribute CSV is empty");
    const std::vector<std::string> header = split_csv(lines[0]);
    if (header.size() < 2 || header[0] != "id") {
        throw Error(ErrorCode::ParseError, "attribute CSV header must be 'id,<var1>,...'");
    }
    std::vector<AttributeTable::Variable> vars;
    for (std::size_t c = 1; c < header.size(); ++c) vars.push_back({header[c], {}});
    std::vector<std::string> ids;
    for (std::size_t l = 1; l < lines.size(); ++l) {
        if (trim(lines[l]).empty()) continue;
        const std::vector<std::string> fields = split_csv(lines[l]);
        if (fields.size() != header.size()) {
            throw Error(ErrorCode::ParseError, "line " + std::to_string(l + 1) + ": expected " +
                                                   std::to_string(header.size()) + " fields, found " +
                                                   std::to_string(fields.size()));
        }
        ids.push_back(fields[0]);
        for (std::size_t c = 1; c < fields.size(); ++c) {
            const auto value = parse_number(fields[c]);
            if (!value) {
                throw Error(ErrorCode::NonNumericValue, "line " + std::to_string(l + 1) + ", column '" + header[c] +
                                                            "': '" + fields[c] + "' is not a number");
            }
            vars[c - 1].values.push_back(*value);
        }
    }
    return AttributeTable::from_rows(std::move(lattice), ids, std::move(vars));
}

AttributeTable read_attributes(const std::string& path, std::shared_ptr<const Lattice> lattice) {
    return parse_attributes(read_text_file(path), std::move(lattice));
}

std::string format_attributes(const Lattice& lattice, const std::vector<std::string>& names,
                              const std::vector<std::vector<double>>& columns) {
    std::string out = "id";
    for (const auto& name : names) out += "," + csv_field(name);
    out += "\n";
    for (std::size_t i = 0; i < lattice.size(); ++i) {
        out += csv_field(lattice.id(i));
        for (const auto& col : columns) out += "," + format_number(col.at(i));
        out += "\n";
    }
    return out;
}

namespace {

struct IdIndex {
    std::vector<std::string> ids;
    std::unordered_map<std::string, std::size_t> index;

    std::size_t get(std::string_view id) {
        auto [it, inserted] = index.emplace(std::string(id), ids.size());
        if (inserted) ids.emplace_back(id);
        return it->second;
    }
};

// "0 n <name> <id-var>"; site lines carry exactly two tokens.
bool is_header(const std::vector<std::string_view>& tokens) { return tokens.size() >= 3 && tokens[0] == "0"; }

}  // namespace

WeightsFile parse_gal(std::string_view text) {
    const auto lines = split_lines(text);
    if (lines.empty()) throw Error(ErrorCode::ParseError, "GAL file is empty");
    const auto head = split_ws(lines[0]);
    std::size_t l = 0;
    std::optional<std::size_t> declared;
    if (is_header(head)) {
        const auto n = parse_number(head[1]);
        if (!n || *n < 0 || *n != std::floor(*n)) throw Error(ErrorCode::ParseError, "GAL header has a bad site count");
        declared = static_cast<std::size_t>(*n);
        l = 1;
    } else if (head.size() == 1) {
        const auto n = parse_number(head[0]);
        if (!n) throw Error(ErrorCode::ParseError, "GAL header has a bad site count");
        declared = static_cast<std::size_t>(*n);
        l = 1;
    }
    IdIndex ids;
    WeightsFile file;
    while (l < lines.size()) {
        const auto site_line = split_ws(lines[l]);
        if (site_line.empty()) {
            ++l;
            continue;
        }
        if (site_line.size() != 2) {
            throw Error(ErrorCode::ParseError, "GAL line " + std::to_string(l + 1) + ": expected '<id> <degree>'");
        }
        const auto degree = parse_number(site_line[1]);
        if (!degree || *degree < 0 || *degree != std::floor(*degree)) {
            throw Error(ErrorCode::ParseError, "GAL line " + std::to_string(l + 1) + ": bad degree");
        }
        const std::size_t row = ids.get(site_line[0]);
        std::vector<std::string_view> neighbours;
        if (*degree > 0) {
            if (l + 1 >= lines.size()) throw Error(ErrorCode::ParseError, "GAL file truncated");
            neighbours = split_ws(lines[l + 1]);
            if (neighbours.size() != static_cast<std::size_t>(*degree)) {
                throw Error(ErrorCode::ParseError, "GAL line " + std::to_string(l + 2) + ": neighbour count differs from degree");
            }
            l += 2;
        } else {
            // Islands may or may not carry an empty neighbour line.
            l += (l + 1 < lines.size() && split_ws(lines[l + 1]).empty()) ? 2 : 1;
        }
        for (auto nb : neighbours) file.entries.push_back({row, ids.get(nb), 1.0});
    }
    file.ids = std::move(ids.ids);
    if (declared && *declared != file.ids.size()) {
        throw Error(ErrorCode::ParseError, "GAL header declares " + std::to_string(*declared) + " sites, file lists " +
                                               std::to_string(file.ids.size()));
    }
    return file;
}

WeightsFile parse_gwt(std::string_view text) {
    const auto lines = split_lines(text);
    IdIndex ids;
    WeightsFile file;
    for (std::size_t l = 0; l < lines.size(); ++l) {
        const auto tokens = split_ws(lines[l]);
        if (tokens.empty()) continue;
        if (l == 0 && tokens.size() != 3) continue;  // header line
        if (tokens.size() != 3) {
            throw Error(ErrorCode::ParseError, "GWT line " + std::to_string(l + 1) + ": expected '<id_i> <id_j> <w>'");
        }
        const auto weight = parse_number(tokens[2]);
        if (!weight) throw Error(ErrorCode::NonNumericValue, "GWT line " + std::to_string(l + 1) + ": bad weight");
        const std::size_t row = ids.get(tokens[0]);
        const std::size_t col = ids.get(tokens[1]);
        file.entries.push_back({row, col, *weight});
    }
    file.ids = std::move(ids.ids);
    return file;
}

WeightMatrix align_weights(const WeightsFile& file, const Lattice& lattice) {
    std::vector<std::size_t> map(file.ids.size());
    for (std::size_t k = 0; k < file.ids.size(); ++k) map[k] = lattice.index_of(file.ids[k]);
    std::vector<Triplet> triplets;
    triplets.reserve(file.entries.size());
    bool binary = true;
    for (const Triplet& t : file.entries) {
        triplets.push_back({map[t.row], map[t.col], t.weight});
        if (t.weight != 1.0) binary = false;
    }
    if (binary) return WeightMatrix::from_triplets(lattice.size(), std::move(triplets));

    std::vector<double> sums(lattice.size(), 0.0);
    for (const Triplet& t : triplets) sums[t.row] += t.weight;
    for (std::size_t i = 0; i < sums.size(); ++i) {
        if (sums[i] != 0.0 && std::abs(sums[i] - 1.0) > 1e-6) {
            throw Error(ErrorCode::ParseError, "weights file holds general weights; only binary or row-standardized "
                                               "weights are supported (row '" + lattice.id(i) + "')");
        }
    }
    for (Triplet& t : triplets) t.weight /= sums[t.row];
    return WeightMatrix::from_triplets(lattice.size(), std::move(triplets), Standardization::RowStandardized);
}

Lattice lattice_from_weights(const WeightsFile& file) { return Lattice::from_ids(file.ids); }

std::string format_gal(const WeightMatrix& w, const Lattice& lattice, std::string_view name) {
    if (w.size() != lattice.size()) throw Error(ErrorCode::LengthMismatch, "weights and lattice differ in size");
    std::string out = "0 " + std::to_string(w.size()) + " " + std::string(name) + " id\n";
    for (std::size_t i = 0; i < w.size(); ++i) {
        out += lattice.id(i) + " " + std::to_string(w.degree(i)) + "\n";
        std::string line;
        for (std::size_t j : w.neighbors(i)) {
            if (!line.empty()) line += ' ';
            line += lattice.id(j);
        }
        out += line + "\n";
    }
    return out;
}

std::string format_gwt(const WeightMatrix& w, const Lattice& lattice, std::string_view name) {
    if (w.size() != lattice.size()) throw Error(ErrorCode::LengthMismatch, "weights and lattice differ in size");
    std::string out = "0 " + std::to_string(w.size()) + " " + std::string(name) + " id\n";
    for (const Triplet& t : w.triplets()) {
        out += lattice.id(t.row) + " " + lattice.id(t.col) + " " + format_number(t.weight) + "\n";
    }
    return out;
}

std::string format_result_json(const AssocResult& result) {
    ordered_json j;
    j["spec_version"] = format_version;
    j["statistic"] = result.statistic;
    j["kind"] = to_string(result.kind);
    j["variant"] = to_string(result.variant);
    j["vars"] = result.vars;
    j["given"] = result.given;
    j["null_mean"] = number_or_null(result.null_mean);
    j["null_variance"] = number_or_null(result.null_variance);
    j["n"] = result.n;
    j["s0"] = result.s0;
    if (result.pseudo_p) {
        j["pseudo_p"] = *result.pseudo_p;
        j["permutations"] = result.permutations;
    }
    return j.dump(2) + "\n";
}

std::string format_local_csv(const Lattice& lattice, const LocalAssocMap& map) {
    if (map.values.size() != lattice.size()) throw Error(ErrorCode::LengthMismatch, "local map size mismatch");
    std::string out = "id,value,expected,island\n";
    for (std::size_t i = 0; i < lattice.size(); ++i) {
        const bool island = map.island_mask[i];
        out += csv_field(lattice.id(i)) + "," + (island ? "NA" : format_number(map.values[i])) + "," +
               format_number(map.expected[i]) + "," + (island ? "1" : "0") + "\n";
    }
    return out;
}

std::string format_significance_csv(const Lattice& lattice, const SignificanceMap& map) {
    if (map.sites.size() != lattice.size()) throw Error(ErrorCode::LengthMismatch, "significance map size mismatch");
    std::string out = "id,value,z_value,z_lag,pseudo_p,class\n";
    for (std::size_t i = 0; i < lattice.size(); ++i) {
        const SiteSignificance& s = map.sites[i];
        const bool island = s.quadrant == Quadrant::Island;
        out += csv_field(lattice.id(i)) + "," + (island ? "NA" : format_number(s.value)) + "," +
               format_number(s.z_value) + "," + (island ? "NA" : format_number(s.z_lag)) + "," +
               (s.pseudo_p ? format_number(*s.pseudo_p) : "NA") + "," + to_string(s.quadrant) + "\n";
    }
    return out;
}

}  // namespace lattassoc::io
