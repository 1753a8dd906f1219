#include "lattassoc/run.hpp"

#include <CLI11.hpp>
#include <array>
#include <filesystem>
#include <json.hpp>
#include <memory>
#include <ostream>
#include <sstream>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "lattassoc/error.hpp"
#include "lattassoc/io.hpp"
#include "lattassoc/local_assoc.hpp"
#include "lattassoc/synthetic.hpp"

namespace lattassoc {

namespace {

[[noreturn]] void config_error(const std::string& message) { throw Error(ErrorCode::ConfigError, message); }

bool ends_with(const std::string& s, std::string_view suffix) {
    return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

bool is_weights_file(const std::string& arg) {
    return ends_with(arg, ".gal") || ends_with(arg, ".GAL") || ends_with(arg, ".gwt") || ends_with(arg, ".GWT");
}

struct Inputs {
    std::shared_ptr<const Lattice> lattice;
    std::string geojson_text;
    WeightMatrix w;
};

Inputs load_inputs(const RunConfig& cfg) {
    Inputs in;
    if (!cfg.geojson_path.empty()) {
        in.geojson_text = io::read_text_file(cfg.geojson_path);
        in.lattice = std::make_shared<const Lattice>(io::parse_geojson(in.geojson_text));
    }
    if (is_weights_file(cfg.weights)) {
        const std::string text = io::read_text_file(cfg.weights);
        const bool gwt = ends_with(cfg.weights, ".gwt") || ends_with(cfg.weights, ".GWT");
        const io::WeightsFile file = gwt ? io::parse_gwt(text) : io::parse_gal(text);
        if (!in.lattice) {
            if (gwt) config_error("a GWT weights file needs --geojson to fix the site list");
            in.lattice = std::make_shared<const Lattice>(io::lattice_from_weights(file));
        }
        in.w = io::align_weights(file, *in.lattice);
        if (cfg.order > 1) in.w = higher_order(in.w, cfg.order);
    } else {
        if (!in.lattice) config_error("inline weights '" + cfg.weights + "' need --geojson");
        BuildOptions options{cfg.snap_tolerance, cfg.strict};
        in.w = build_weights(*in.lattice, parse_neighbor_spec(cfg.weights).with_order(cfg.order), options);
    }
    if (cfg.symmetrize) in.w = symmetrize_union(in.w);
    if (cfg.standardize == Standardization::RowStandardized) {
        if (in.w.standardization() == Standardization::Binary) in.w = row_standardize(in.w);
    } else if (in.w.standardization() != Standardization::Binary) {
        config_error("--standardize binary requested but the weights file is row-standardized");
    }
    return in;
}

void emit(const RunConfig& cfg, const std::string& content, std::ostream& out) {
    if (cfg.out_path.empty()) {
        out << content;
    } else {
        io::write_text_file(cfg.out_path, content);
    }
}

void warn_dropped(const std::vector<std::string>& dropped, std::ostream& err) {
    for (const auto& name : dropped) {
        err << "warning: conditioning variable '" << name << "' has zero variance and was dropped\n";
    }
}

LocalStatistic local_statistic(Variant v) {
    switch (v) {
        case Variant::Univariate: return LocalStatistic::LocalMoran;
        case Variant::Bivariate: return LocalStatistic::LocalMoranBiv;
        case Variant::Partial: return LocalStatistic::LocalMoranPartial;
        case Variant::SemiPartial: break;
    }
    config_error("no local semi-partial statistic");
}

VariableSelection selection(const RunConfig& cfg) {
    return {cfg.var_i, cfg.variant == Variant::Univariate ? std::string() : cfg.var_j, cfg.given};
}

void run_weights(const RunConfig& cfg, std::ostream& out) {
    const Inputs in = load_inputs(cfg);
    const bool gwt = ends_with(cfg.out_path, ".gwt") || ends_with(cfg.out_path, ".GWT");
    emit(cfg, gwt ? io::format_gwt(in.w, *in.lattice) : io::format_gal(in.w, *in.lattice), out);
    if (!cfg.out_path.empty()) {
        std::size_t islands = 0;
        for (std::size_t i = 0; i < in.w.size(); ++i) islands += in.w.is_island(i) ? 1 : 0;
        out << "weights " << cfg.weights << ": n=" << in.w.size() << " links=" << in.w.nnz()
            << " islands=" << islands << " symmetric=" << (in.w.symmetric() ? "true" : "false") << "\n";
    }
}

void run_global(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
    const Inputs in = load_inputs(cfg);
    const AttributeTable table = io::read_attributes(cfg.data_path, in.lattice);
    const bool moran = cfg.stat == StatKind::MoranI;
    AssocResult result;
    PermutationPlan plan{cfg.permutations, cfg.seed, PermutationScheme::Total, cfg.alternative};

    switch (cfg.variant) {
        case Variant::Univariate:
            if (cfg.permutations > 0) {
                result = permute_global(moran ? GlobalStatistic::MoranI : GlobalStatistic::GearyC, table,
                                        selection(cfg), in.w, plan);
            } else {
                const auto& x = table.variable(cfg.var_i);
                result = moran ? moran_i(x, in.w) : geary_c(x, in.w);
                result.vars = {cfg.var_i};
            }
            break;
        case Variant::Bivariate:
            if (cfg.permutations > 0) {
                result = permute_global(moran ? GlobalStatistic::MoranIBiv : GlobalStatistic::GearyCBiv, table,
                                        selection(cfg), in.w, plan);
            } else {
                const auto& xi = table.variable(cfg.var_i);
                const auto& xj = table.variable(cfg.var_j);
                result = moran ? moran_i_biv(xi, xj, in.w) : geary_c_biv(xi, xj, in.w);
                result.vars = {cfg.var_i, cfg.var_j};
            }
            break;
        case Variant::Partial:
            if (cfg.recursion) {
                result = moran ? moran_i_partial_recursive(table, cfg.var_i, cfg.var_j, cfg.given[0], in.w)
                               : geary_c_partial_recursive(table, cfg.var_i, cfg.var_j, cfg.given[0], in.w);
            } else if (cfg.permutations > 0) {
                result = permute_global(moran ? GlobalStatistic::MoranIPartial : GlobalStatistic::GearyCPartial,
                                        table, selection(cfg), in.w, plan);
            } else {
                result = moran ? moran_i_partial(table, cfg.var_i, cfg.var_j, cfg.given, in.w)
                               : geary_c_partial(table, cfg.var_i, cfg.var_j, cfg.given, in.w);
            }
            break;
        case Variant::SemiPartial:
            result = moran ? moran_i_semipartial(table, cfg.var_i, cfg.var_j, cfg.given[0], in.w)
                           : geary_c_semipartial(table, cfg.var_i, cfg.var_j, cfg.given[0], in.w);
            break;
    }
    warn_dropped(result.dropped_given, err);
    if (!cfg.out_path.empty()) io::write_text_file(cfg.out_path, io::format_result_json(result));

    out << to_string(result.kind) << ' ' << to_string(result.variant);
    for (const auto& v : result.vars) out << ' ' << v;
    if (!result.given.empty()) {
        out << " |";
        for (const auto& g : result.given) out << ' ' << g;
    }
    out << ": statistic=" << io::format_number(result.statistic);
    if (result.null_mean) out << " null_mean=" << io::format_number(*result.null_mean);
    if (result.null_variance) out << " null_variance=" << io::format_number(*result.null_variance);
    if (result.pseudo_p) out << " pseudo_p=" << io::format_number(*result.pseudo_p);
    out << '\n';
}

void run_local(const RunConfig& cfg, std::ostream& out) {
    const Inputs in = load_inputs(cfg);
    const AttributeTable table = io::read_attributes(cfg.data_path, in.lattice);
    const LocalStatistic stat = local_statistic(cfg.variant);
    const LocalFields fields = local_fields(stat, table, selection(cfg));
    const LocalAssocMap map = local_map(stat, fields, in.w);
    emit(cfg, io::format_local_csv(*in.lattice, map), out);
    if (!cfg.out_path.empty()) {
        std::size_t islands = 0;
        for (bool island : map.island_mask) islands += island ? 1 : 0;
        out << to_string(map.kind) << ": n=" << map.values.size() << " islands=" << islands << '\n';
    }
}

void run_sigmap(const RunConfig& cfg, std::ostream& out) {
    const Inputs in = load_inputs(cfg);
    const AttributeTable table = io::read_attributes(cfg.data_path, in.lattice);
    const LocalStatistic stat = local_statistic(cfg.variant);
    const LocalFields fields = local_fields(stat, table, selection(cfg));
    const LocalAssocMap map = local_map(stat, fields, in.w);
    const PermutationPlan plan{cfg.permutations == 0 ? 999 : cfg.permutations, cfg.seed,
                               PermutationScheme::ConditionalOnSite, cfg.alternative};
    const LocalPermutation perm = permute_local_fields(fields.xi, fields.xj, in.w, plan);
    const SignificanceMap sig =
        classify_quadrants(fields.xi, fields.xj, in.w, perm.pseudo_p, cfg.alpha, map.values, {cfg.fdr});

    emit(cfg, io::format_significance_csv(*in.lattice, sig), out);
    if (!cfg.geojson_out_path.empty()) {
        if (in.geojson_text.empty()) config_error("--geojson-out needs --geojson input");
        io::write_text_file(cfg.geojson_out_path, io::enrich_geojson(in.geojson_text, *in.lattice, sig));
    }
    if (!cfg.out_path.empty()) {
        std::array<std::size_t, 6> counts{};
        for (const auto& s : sig.sites) ++counts[static_cast<std::size_t>(s.quadrant)];
        out << "sigmap " << to_string(map.kind) << " permutations=" << plan.replicates
            << " alpha=" << io::format_number(cfg.alpha) << ':';
        for (Quadrant q : {Quadrant::HH, Quadrant::HL, Quadrant::LH, Quadrant::LL, Quadrant::NotSignificant,
                           Quadrant::Island}) {
            out << ' ' << to_string(q) << '=' << counts[static_cast<std::size_t>(q)];
        }
        out << '\n';
    }
}

void run_simulate(const RunConfig& cfg, std::ostream& out) {
    auto lattice = std::make_shared<const Lattice>(grid_lattice(cfg.rows, cfg.cols));
    if (is_weights_file(cfg.weights)) config_error("simulate builds weights on its grid; pass an inline spec");
    WeightMatrix w = row_standardize(build_weights(*lattice, parse_neighbor_spec(cfg.weights).with_order(cfg.order)));
    std::vector<std::size_t> block;
    if (cfg.hotspot) {
        const HotspotBlock& h = *cfg.hotspot;
        block = grid_block(cfg.rows, cfg.cols, h.row0, h.col0, h.height, h.width);
    }
    const SarSpec sar{cfg.rho, cfg.noise_sd, cfg.seed};
    std::vector<std::string> names;
    std::vector<std::vector<double>> columns;
    if (cfg.model == "sar") {
        std::vector<double> x = simulate_sar(w, sar);
        if (cfg.hotspot) plant_hotspot(x, block, cfg.hotspot->shift);
        names = {"x"};
        columns = {std::move(x)};
    } else {
        CommonDriverSpec spec{sar, cfg.driver_a, cfg.driver_b, cfg.noise_sd, block,
                              cfg.hotspot ? cfg.hotspot->shift : 0.0};
        DriverTriple t = simulate_common_driver(w, spec);
        names = {"x", "y", "z"};
        columns = {std::move(t.xi), std::move(t.xj), std::move(t.z)};
    }
    io::write_text_file(cfg.out_path, io::format_attributes(*lattice, names, columns));
    if (!cfg.geojson_out_path.empty()) io::write_text_file(cfg.geojson_out_path, io::format_geojson(*lattice));
    out << "simulate " << cfg.model << ": " << cfg.rows << "x" << cfg.cols << " rho=" << io::format_number(cfg.rho)
        << " seed=" << cfg.seed << " variables=" << names.size() << '\n';
}

}  // namespace

NeighborSpec parse_neighbor_spec(const std::string& text) {
    const auto colon = text.find(':');
    const std::string head = text.substr(0, colon);
    const std::string arg = colon == std::string::npos ? std::string() : text.substr(colon + 1);
    auto number = [&](const std::string& s) {
        const auto v = io::parse_number(s);
        if (!v) config_error("bad number '" + s + "' in weights spec '" + text + "'");
        return *v;
    };
    NeighborSpec spec;
    if (head == "queen" && arg.empty()) {
        spec = NeighborSpec::queen();
    } else if (head == "rook" && arg.empty()) {
        spec = NeighborSpec::rook();
    } else if (head == "knn") {
        const double k = number(arg);
        if (k < 1 || k != std::floor(k)) config_error("knn needs a positive integer k");
        spec = NeighborSpec::knearest(static_cast<std::size_t>(k));
    } else if (head == "dist") {
        spec = NeighborSpec::distance_threshold(number(arg));
    } else if (head == "band") {
        const auto comma = arg.find(',');
        if (comma == std::string::npos) config_error("band needs 'band:<lower>,<upper>'");
        spec = NeighborSpec::distance_band(number(arg.substr(0, comma)), number(arg.substr(comma + 1)));
    } else {
        config_error("unknown weights spec '" + text + "' (expected a .gal/.gwt path or queen|rook|knn:k|dist:d|band:lo,hi)");
    }
    try {
        spec.validate();
    } catch (const Error& e) {
        config_error(e.what());
    }
    return spec;
}

void RunConfig::validate() const {
    if (threads < 0) config_error("--threads must be >= 0");
    if (order == 0) config_error("--order must be >= 1");
    if (command == Command::Simulate) {
        if (out_path.empty()) config_error("simulate needs --out");
        if (rows * cols < 2) config_error("simulate needs at least 2 grid cells");
        if (model != "sar" && model != "driver") config_error("--model must be 'sar' or 'driver'");
        return;
    }
    if (command == Command::Weights) {
        if (!geojson_path.empty() || is_weights_file(weights)) return;
        config_error("weights needs --geojson (or a GAL/GWT --weights file)");
    }
    if (data_path.empty()) config_error("--data is required");
    if (var_i.empty()) config_error("--i (or --var) is required");
    if (variant != Variant::Univariate && var_j.empty()) config_error("--j is required for variant " + to_string(variant));
    if ((variant == Variant::Partial || variant == Variant::SemiPartial) && given.empty()) {
        config_error("variant " + to_string(variant) + " needs a conditioning list (--given)");
    }
    if (variant == Variant::SemiPartial && given.size() != 1) {
        config_error("semipartial takes exactly one conditioning variable");
    }
    if (recursion && (variant != Variant::Partial || given.size() != 1)) {
        config_error("--recursion needs --variant partial with exactly one --given variable");
    }
    if (permutations != 0 && permutations < 19) config_error("--permutations must be 0 or >= 19");
    if (!(alpha > 0.0 && alpha < 1.0)) config_error("--alpha must lie in (0, 1)");
    if (command == Command::Global && permutations > 0 && (recursion || variant == Variant::SemiPartial)) {
        config_error("permutation inference is not available for recursion-based statistics");
    }
    if (command == Command::Local || command == Command::SigMap) {
        if (stat != StatKind::MoranI) config_error("local statistics are Moran-type only");
        if (variant == Variant::SemiPartial) config_error("no local semi-partial statistic");
    }
}

void run(const RunConfig& config, std::ostream& out, std::ostream& err) {
    config.validate();
#ifdef _OPENMP
    if (config.threads > 0) omp_set_num_threads(config.threads);
#endif
    switch (config.command) {
        case Command::Weights: run_weights(config, out); break;
        case Command::Global: run_global(config, out, err); break;
        case Command::Local: run_local(config, out); break;
        case Command::SigMap: run_sigmap(config, out); break;
        case Command::Simulate: run_simulate(config, out); break;
    }
}

namespace {

void report(std::ostream& err, std::string_view code, const std::string& message) {
    nlohmann::ordered_json j;
    j["error"] = std::string(code);
    j["message"] = message;
    err << j.dump() << '\n';
}

void apply_stat(RunConfig& cfg, const std::string& stat, const std::string& variant) {
    std::string kind = stat;
    std::string implied;
    if (const auto dash = stat.find('-'); dash != std::string::npos) {
        kind = stat.substr(0, dash);
        implied = stat.substr(dash + 1);
    }
    if (kind == "moran") {
        cfg.stat = StatKind::MoranI;
    } else if (kind == "geary") {
        cfg.stat = StatKind::GearyC;
    } else {
        config_error("--stat must be moran or geary (optionally suffixed -uni|-biv|-partial|-semipartial)");
    }
    if (!implied.empty() && !variant.empty() && implied != variant) {
        config_error("--stat " + stat + " conflicts with --variant " + variant);
    }
    const std::string v = variant.empty() ? (implied.empty() ? "uni" : implied) : variant;
    if (v == "uni") {
        cfg.variant = Variant::Univariate;
    } else if (v == "biv") {
        cfg.variant = Variant::Bivariate;
    } else if (v == "partial") {
        cfg.variant = Variant::Partial;
    } else if (v == "semipartial") {
        cfg.variant = Variant::SemiPartial;
    } else {
        config_error("--variant must be uni|biv|partial|semipartial");
    }
}

std::vector<std::string> split_given(const std::vector<std::string>& raw) {
    std::vector<std::string> out;
    for (const auto& item : raw) {
        std::stringstream ss(item);
        std::string part;
        while (std::getline(ss, part, ',')) {
            if (!part.empty()) out.push_back(part);
        }
    }
    return out;
}

HotspotBlock parse_hotspot(const std::string& text) {
    std::vector<double> parts;
    std::stringstream ss(text);
    std::string part;
    while (std::getline(ss, part, ',')) {
        const auto v = io::parse_number(part);
        if (!v) config_error("bad --hotspot value '" + text + "'");
        parts.push_back(*v);
    }
    if (parts.size() != 4 && parts.size() != 5) config_error("--hotspot takes row0,col0,height,width[,shift]");
    for (std::size_t k = 0; k < 4; ++k) {
        if (parts[k] < 0 || parts[k] != std::floor(parts[k])) config_error("--hotspot block bounds must be integers");
    }
    HotspotBlock h{static_cast<std::size_t>(parts[0]), static_cast<std::size_t>(parts[1]),
                   static_cast<std::size_t>(parts[2]), static_cast<std::size_t>(parts[3])};
    if (parts.size() == 5) h.shift = parts[4];
    return h;
}

}  // namespace

int cli_main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Global, local, bivariate, partial and semi-partial Moran's I / Geary's C on lattice data"};
    app.require_subcommand(1);

    RunConfig cfg;
    std::string stat = "moran";
    std::string variant;
    std::string standardize = "row";
    std::string alternative = "two-sided";
    std::vector<std::string> given_raw;
    std::string hotspot;
    std::uint64_t seed = 0;

    auto add_weights = [&](CLI::App* sub) {
        sub->add_option("--geojson", cfg.geojson_path, "FeatureCollection with an 'id' property per feature");
        sub->add_option("--weights", cfg.weights,
                        "GAL/GWT file, or queen|rook|knn:k|dist:d|band:lo,hi (default queen; contiguity is "
                        "exact-coordinate shared border, queen counts corner contact)");
        sub->add_option("--order", cfg.order, "higher-order (exclusive) neighbourhood");
        sub->add_flag("--symmetrize", cfg.symmetrize, "union-symmetrize (k-NN)");
        sub->add_option("--snap", cfg.snap_tolerance, "contiguity snapping tolerance (default 0)");
        sub->add_flag("--strict", cfg.strict, "fail when the weights have no links");
        sub->add_option("--standardize", standardize, "row|binary (default row)");
        sub->add_option("--threads", cfg.threads, "OpenMP threads (0: default)");
    };
    auto add_stat = [&](CLI::App* sub) {
        sub->add_option("--data", cfg.data_path, "CSV with header id,<var1>,...");
        sub->add_option("--stat", stat, "moran|geary, or moran-partial style compound");
        sub->add_option("--variant", variant, "uni|biv|partial|semipartial");
        sub->add_option("--i,--var", cfg.var_i, "first (or only) variable");
        sub->add_option("--j", cfg.var_j, "second variable");
        sub->add_option("--given", given_raw, "conditioning variables (repeat or comma-separate)");
        sub->add_flag("--recursion", cfg.recursion, "partial via the single-variable bivariate recursion");
        sub->add_option("--permutations", cfg.permutations, "permutation replicates (0: none)");
        sub->add_option("--seed", seed, "RNG seed");
        sub->add_option("--alternative", alternative, "two-sided|greater|less");
        sub->add_option("--out", cfg.out_path, "output file (stdout when omitted)");
    };

    CLI::App* weights = app.add_subcommand("weights", "build a spatial weights file");
    add_weights(weights);
    weights->add_option("--out", cfg.out_path, "output .gal or .gwt (GAL to stdout when omitted)");

    CLI::App* global = app.add_subcommand("global", "global association statistic");
    add_weights(global);
    add_stat(global);

    CLI::App* local = app.add_subcommand("local", "local Moran values per site");
    add_weights(local);
    add_stat(local);

    CLI::App* sigmap = app.add_subcommand("sigmap", "local significance (hot/cold spot) map");
    add_weights(sigmap);
    add_stat(sigmap);
    sigmap->add_option("--alpha", cfg.alpha, "significance level (default 0.05)");
    sigmap->add_flag("--fdr", cfg.fdr, "Benjamini-Hochberg cutoff instead of alpha");
    sigmap->add_option("--geojson-out", cfg.geojson_out_path, "input GeoJSON enriched with lisa_* properties");

    CLI::App* simulate = app.add_subcommand("simulate", "simulate SAR fields on a grid");
    simulate->add_option("--rows", cfg.rows, "grid rows");
    simulate->add_option("--cols", cfg.cols, "grid columns");
    simulate->add_option("--model", cfg.model, "sar|driver");
    simulate->add_option("--rho", cfg.rho, "SAR coefficient, |rho| < 1");
    simulate->add_option("--noise-sd", cfg.noise_sd, "noise standard deviation");
    simulate->add_option("--a", cfg.driver_a, "driver loading of x");
    simulate->add_option("--b", cfg.driver_b, "driver loading of y");
    simulate->add_option("--hotspot", hotspot, "row0,col0,height,width[,shift]");
    simulate->add_option("--seed", seed, "RNG seed");
    simulate->add_option("--weights", cfg.weights, "inline weights spec for the grid (default queen)");
    simulate->add_option("--out", cfg.out_path, "attribute CSV path");
    simulate->add_option("--geojson-out", cfg.geojson_out_path, "grid GeoJSON path");

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    if (!reversed.empty()) reversed.pop_back();  // program name
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return 0;
    } catch (const CLI::ParseError& e) {
        report(err, "ConfigError", e.what());
        return 2;
    }

    try {
        if (app.got_subcommand(weights)) cfg.command = Command::Weights;
        if (app.got_subcommand(global)) cfg.command = Command::Global;
        if (app.got_subcommand(local)) cfg.command = Command::Local;
        if (app.got_subcommand(sigmap)) cfg.command = Command::SigMap;
        if (app.got_subcommand(simulate)) cfg.command = Command::Simulate;
        cfg.seed = seed;
        apply_stat(cfg, stat, variant);
        cfg.given = split_given(given_raw);
        if (standardize == "row") {
            cfg.standardize = Standardization::RowStandardized;
        } else if (standardize == "binary") {
            cfg.standardize = Standardization::Binary;
        } else {
            config_error("--standardize must be row or binary");
        }
        if (alternative == "two-sided") {
            cfg.alternative = Alternative::TwoSided;
        } else if (alternative == "greater") {
            cfg.alternative = Alternative::Greater;
        } else if (alternative == "less") {
            cfg.alternative = Alternative::Less;
        } else {
            config_error("--alternative must be two-sided|greater|less");
        }
        if (!hotspot.empty()) cfg.hotspot = parse_hotspot(hotspot);
        run(cfg, out, err);
        return 0;
    } catch (const Error& e) {
        report(err, error_code_name(e.code()), e.what());
        return e.code() == ErrorCode::ConfigError ? 2 : 1;
    } catch (const std::exception& e) {
        report(err, "InternalError", e.what());
        return 1;
    }
}

}  // namespace lattassoc
