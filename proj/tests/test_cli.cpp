#include <filesystem>
#include <sstream>

#include "doctest.h"
#include "json.hpp"
#include "lattassoc/io.hpp"
#include "lattassoc/run.hpp"
#include "lattassoc/synthetic.hpp"

using namespace lattassoc;

namespace {

struct Outcome {
    int code;
    std::string out;
    std::string err;
};

Outcome cli(std::vector<std::string> args) {
    std::ostringstream out, err;
    args.insert(args.begin(), "lattassoc");
    const int code = cli_main(args, out, err);
    return {code, out.str(), err.str()};
}

std::string scratch(const std::string& name) {
    const std::filesystem::path dir = std::filesystem::path(LATTASSOC_TEST_TMP) / "cli";
    std::filesystem::create_directories(dir);
    return (dir / name).string();
}

void checkerboard_fixture() {
    io::write_text_file(scratch("board.geojson"), io::format_geojson(grid_lattice(2, 2)));
    io::write_text_file(scratch("board.csv"), "id,x\nr0c0,1\nr0c1,-1\nr1c0,-1\nr1c1,1\n");
}

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("global Moran on the checkerboard") {
    checkerboard_fixture();
    const Outcome o = cli({"global", "--geojson", scratch("board.geojson"), "--data", scratch("board.csv"),
                           "--weights", "rook", "--stat", "moran", "--var", "x", "--out", scratch("board.json")});
    CHECK(o.code == 0);
    CHECK(o.out.find("statistic=-1 ") != std::string::npos);
    const auto j = nlohmann::json::parse(io::read_text_file(scratch("board.json")));
    CHECK(j["statistic"].get<double>() == -1.0);
    CHECK(j["spec_version"] == 1);
}

TEST_CASE("Geary on binary weights") {
    checkerboard_fixture();
    const Outcome o = cli({"global", "--geojson", scratch("board.geojson"), "--data", scratch("board.csv"),
                           "--weights", "rook", "--standardize", "binary", "--stat", "geary", "--var", "x"});
    CHECK(o.code == 0);
    CHECK(o.out.find("statistic=1.5") != std::string::npos);
}

TEST_CASE("simulate, then partial sigmap is reproducible") {
    REQUIRE(cli({"simulate", "--rows", "8", "--cols", "8", "--model", "driver", "--rho", "0.6", "--seed", "2",
                 "--hotspot", "2,2,3,3", "--out", scratch("sim.csv"), "--geojson-out", scratch("sim.geojson")})
                .code == 0);
    std::vector<std::string> args{"sigmap", "--geojson", scratch("sim.geojson"), "--data", scratch("sim.csv"),
                                  "--stat", "moran-partial", "--i", "x", "--j", "y", "--given", "z",
                                  "--permutations", "999", "--alpha", "0.05", "--seed", "7"};
    auto first = args, second = args;
    first.insert(first.end(), {"--out", scratch("a.csv"), "--geojson-out", scratch("a.geojson")});
    second.insert(second.end(), {"--out", scratch("b.csv"), "--geojson-out", scratch("b.geojson")});
    REQUIRE(cli(first).code == 0);
    REQUIRE(cli(second).code == 0);
    CHECK(io::read_text_file(scratch("a.csv")) == io::read_text_file(scratch("b.csv")));
    CHECK(io::read_text_file(scratch("a.geojson")) == io::read_text_file(scratch("b.geojson")));
}

TEST_CASE("partial without a conditioning list is a configuration error") {
    checkerboard_fixture();
    const Outcome o = cli({"global", "--geojson", scratch("board.geojson"), "--data", scratch("board.csv"),
                           "--variant", "partial", "--i", "x", "--j", "x"});
    CHECK(o.code == 2);
    const auto j = nlohmann::json::parse(o.err);
    CHECK(j["error"] == "ConfigError");
}

TEST_CASE("library errors are reported as json") {
    checkerboard_fixture();
    const Outcome o = cli({"global", "--geojson", scratch("board.geojson"), "--data", scratch("board.csv"),
                           "--var", "nope"});
    CHECK(o.code == 1);
    CHECK(nlohmann::json::parse(o.err)["error"] == "UnknownVariable");
    CHECK(cli({"global", "--geojson", scratch("missing.geojson"), "--data", scratch("board.csv"), "--var", "x"})
              .code == 1);
}

TEST_CASE("weights files drive the statistics") {
    checkerboard_fixture();
    REQUIRE(cli({"weights", "--geojson", scratch("board.geojson"), "--weights", "rook", "--out",
                 scratch("board.gal")}).code == 0);
    const Outcome o = cli({"global", "--weights", scratch("board.gal"), "--data", scratch("board.csv"), "--var", "x"});
    CHECK(o.code == 0);
    CHECK(o.out.find("statistic=-1 ") != std::string::npos);

    REQUIRE(cli({"weights", "--geojson", scratch("board.geojson"), "--weights", "queen", "--standardize", "row",
                 "--out", scratch("board.gwt")}).code == 0);
    const auto w = io::parse_gwt(io::read_text_file(scratch("board.gwt")));
    CHECK(w.entries.size() == 12);
}

TEST_CASE("local map output") {
    checkerboard_fixture();
    const Outcome o = cli({"local", "--geojson", scratch("board.geojson"), "--data", scratch("board.csv"),
                           "--weights", "rook", "--var", "x"});
    CHECK(o.code == 0);
    CHECK(o.out.rfind("id,value,expected,island\n", 0) == 0);
    CHECK(o.out.find("r0c0,-0.75,") != std::string::npos);
}

TEST_CASE("neighbour spec parsing") {
    CHECK(parse_neighbor_spec("knn:4").k == 4);
    CHECK(parse_neighbor_spec("band:1,2.5").band_upper == 2.5);
    CHECK(parse_neighbor_spec("dist:3").threshold == 3.0);
    CHECK(parse_neighbor_spec("rook").method == NeighborSpec::Method::RookContiguity);
    CHECK_THROWS(parse_neighbor_spec("hex"));
    CHECK_THROWS(parse_neighbor_spec("knn:x"));
}

}
