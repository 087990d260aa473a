#include "kitaev/error.hpp"
#include "kitaev/io.hpp"

#include <doctest.h>

#include <fstream>
#include <random>
#include <sstream>

using namespace kitaev;
using namespace kitaev::io;
using json = nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    TempDir() {
        static int counter = 0;
        path = fs::temp_directory_path() / ("kitaev_io_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
};

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::vector<std::string> lines(const std::string& s) {
    std::vector<std::string> out;
    std::istringstream in(s);
    for (std::string line; std::getline(in, line);) out.push_back(line);
    return out;
}

std::string config_error(const json& doc) {
    try {
        parse_config(doc);
    } catch (const ConfigError& e) {
        return e.what();
    }
    return "";
}

}  // namespace

TEST_CASE("defaults") {
    const RunConfig c = parse_config(json::object());
    CHECK(c.task == Task::spectrum);
    CHECK(c.model.N == 40);
    CHECK(c.model.t == 1.0);
    CHECK(c.model.delta == 1.0);
    CHECK(c.model.theta == 0.0);
    CHECK(c.model.gamma == 0.0);
    CHECK(c.model.onsite_delta == 0.0);
    CHECK(c.model.dissipation.kind == DissipationKind::all_bonds);

    const RunConfig scaled = parse_config(json{{"model", {{"t", 2.5}}}});
    CHECK(scaled.model.delta == 2.5);
}

TEST_CASE("errors name the offending key") {
    CHECK(config_error(json{{"model", {{"N", -3}}}}).starts_with("/model/N:"));
    CHECK(config_error(json{{"model", {{"mew", 1}}}}).starts_with("/model/mew:"));
    CHECK(config_error(json{{"bogus", 1}}).starts_with("/bogus:"));
    CHECK(config_error(json{{"model", {{"gamma", -0.1}}}}).starts_with("/model/gamma:"));
    CHECK(config_error(json{{"model", {{"N", 2.5}}}}).starts_with("/model/N:"));
    CHECK(config_error(json{{"model", {{"mu", "zero"}}}}).starts_with("/model/mu:"));
    CHECK(config_error(json{{"task", "fly"}}).starts_with("/task:"));
    CHECK(config_error(json{{"sweep", {{"values", {0.0, "x"}}}}}).starts_with("/sweep/values/1:"));
    CHECK(config_error(json{{"model", {{"N", 10}, {"dissipation", {{"kind", "positional"}, {"positions", {3, 12}}}}}}})
              .starts_with("/model/dissipation/positions/1:"));
    CHECK(config_error(json{{"circuit", {{"q1", {{"Cap", 1}}}}}}).starts_with("/circuit/q1/Cap:"));
    CHECK_THROWS_AS(parse_config_text("{not json"), ConfigError);
}

TEST_CASE("positional dissipation in a config") {
    const RunConfig c = parse_config(json{{"model", {{"dissipation", {{"kind", "positional"}, {"positions", {19}}}}}}});
    CHECK(dissipative_bonds(c.model) == std::vector<int>{19, 21});
}

TEST_CASE("ranges expand to inclusive grids") {
    const RunConfig c = parse_config(json{{"sweep", {{"range", {{"start", 0.0}, {"stop", 1.5}, {"count", 200}}}}}});
    REQUIRE(c.sweep.values.size() == 200);
    CHECK(c.sweep.values.front() == 0.0);
    CHECK(c.sweep.values.back() == 1.5);
    CHECK(c.sweep.values[1] == doctest::Approx(1.5 / 199));
    CHECK(!config_error(json{{"sweep", {{"values", {1.0}}, {"range", {{"count", 2}}}}}}).empty());
}

TEST_CASE("serialize then parse is the identity") {
    json doc = json::parse(R"({
        "task": "phase-diagram", "workers": 3,
        "model": {"N": 12, "mu": 0.25, "theta": -0.5, "gamma": 0.1,
                  "dissipation": {"kind": "positional", "positions": [2, 5]}, "boundary": "periodic"},
        "edge": {"re_tol": 0.01},
        "solver": {"precision": "extended"},
        "sweep": {"axis": "gamma", "range": {"start": 0, "stop": 1, "count": 7}},
        "phase_diagram": {"x": {"parameter": "t", "values": [0.5, 1.0]}, "y": {"parameter": "mu", "values": [0.1]}},
        "gbz": {"sample_sites": 30, "project": false},
        "populations": {"mode": "index", "index": 4},
        "lindblad": {"initial": "single_excitation", "site": 3, "steps": 5},
        "circuit": {"dc_a": 1e-16, "N": 6}
    })");
    const RunConfig c = parse_config(doc);
    const json once = serialize_config(c);
    const RunConfig back = parse_config(once);
    CHECK(serialize_config(back) == once);
    CHECK(back.model == c.model);
    CHECK(back.sweep.values == c.sweep.values);
    CHECK(back.circuit.dc_a == c.circuit.dc_a);
    CHECK(back.precision == Precision::extended);
    CHECK(serialize_config(parse_config(json::object())) == serialize_config(parse_config(serialize_config(parse_config(json::object())))));
}

TEST_CASE("overrides") {
    json doc = json::object();
    apply_override(doc, "model.mu", "0.5");
    apply_override(doc, "sweep.axis", "gamma");
    apply_override(doc, "/model/N", "12");
    apply_override(doc, "sweep.values", "[0, 1, 2]");
    const RunConfig c = parse_config(doc);
    CHECK(c.model.mu == 0.5);
    CHECK(c.model.N == 12);
    CHECK(c.sweep.axis == SweepAxis::gamma);
    CHECK(c.sweep.values == std::vector<double>{0, 1, 2});
    CHECK_THROWS_AS(apply_override(doc, "model..mu", "1"), ConfigError);
}

TEST_CASE("shortest round-trip floats") {
    CHECK(format_double(0.1) == "0.1");
    CHECK(format_double(-2.0) == "-2");
    CHECK(format_double(1e-300) == "1e-300");
    CHECK(format_double(std::nan("")) == "nan");
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> u(-1e3, 1e3);
    for (int i = 0; i < 1000; ++i) {
        const double x = u(rng) * std::pow(10.0, static_cast<int>(rng() % 40) - 20);
        CHECK(std::stod(format_double(x)) == x);
    }
}

TEST_CASE("spectrum task writes 2N rows and a sidecar") {
    TempDir dir;
    const RunConfig c = parse_config(json::object());
    run_task(c, dir.path);
    const auto rows = lines(slurp(dir.path / "spectrum.csv"));
    REQUIRE(rows.size() == 81);
    CHECK(rows[0] == "index,re_E,im_E,residual,edge_flag,edge_weight,ipr");
    const json meta = json::parse(slurp(dir.path / "spectrum.meta.json"));
    CHECK(meta["library_version"] == library_version());
    CHECK(meta["config"] == serialize_config(c));
    CHECK(meta["summary"]["edge_modes"] == 2);
    for (const auto& e : fs::directory_iterator(dir.path)) CHECK(e.path().extension() != ".tmp");
}

TEST_CASE("sweep rows are axis-major and byte-identical across worker counts") {
    TempDir a, b;
    json doc = json::parse(R"({"task": "sweep", "sweep": {"range": {"start": 0, "stop": 1.5, "count": 200}}})");
    doc["workers"] = 1;
    run_task(parse_config(doc), a.path);
    doc["workers"] = 4;
    run_task(parse_config(doc), b.path);
    const std::string csv = slurp(a.path / "sweep.csv");
    CHECK(csv == slurp(b.path / "sweep.csv"));
    const auto rows = lines(csv);
    REQUIRE(rows.size() == 16001);
    CHECK(rows[0] == "axis_value,mode_index,re_E,im_E,edge_flag");
    CHECK(rows[1].starts_with("0,0,"));
    CHECK(rows[80].starts_with("0,79,"));
    CHECK(rows[81].starts_with(format_double(1.5 / 199) + ",0,"));
}

TEST_CASE("identical runs are byte-identical") {
    TempDir a, b;
    const RunConfig c = parse_config(json{{"task", "gbz"}, {"model", {{"delta", 1.3}, {"gamma", 0.2}, {"theta", 0.7853981633974483}, {"mu", 0.2}}}});
    run_task(c, a.path);
    run_task(c, b.path);
    CHECK(slurp(a.path / "gbz.csv") == slurp(b.path / "gbz.csv"));
    CHECK(slurp(a.path / "gbz.meta.json") == slurp(b.path / "gbz.meta.json"));
    CHECK(lines(slurp(a.path / "gbz.csv"))[0] == "loop,re_beta,im_beta,re_E,im_E");
}

TEST_CASE("a failing sweep row is marked and reported") {
    TempDir dir;
    const RunConfig c = parse_config(json{{"task", "sweep"}, {"model", {{"N", 6}}}, {"sweep", {{"axis", "gamma"}, {"values", {0.0, -1.0, 0.5}}}}});
    std::vector<std::string> warnings;
    run_task(c, dir.path, [&](const std::string& w) { warnings.push_back(w); });
    const auto rows = lines(slurp(dir.path / "sweep.csv"));
    REQUIRE(rows.size() == 1 + 12 + 1 + 12);
    CHECK(rows[13] == "-1,-1,nan,nan,failed");
    REQUIRE(warnings.size() == 1);
    CHECK(warnings[0].find("gamma=-1") != std::string::npos);
}

TEST_CASE("every task emits its declared header") {
    const std::vector<std::pair<json, std::pair<std::string, std::string>>> cases = {
        {json{{"task", "phase-diagram"}, {"phase_diagram", {{"x", {{"parameter", "theta"}, {"values", {0.0, 1.0}}}}, {"y", {{"parameter", "mu"}, {"values", {0.5, 2.5}}}}}}},
         {"phase_diagram.csv", "x,y,gap,phase"}},
        {json{{"task", "populations"}, {"model", {{"N", 20}, {"gamma", 0.5}}}}, {"populations.csv", "site,particle_w,hole_w"}},
        {json{{"task", "lindblad-check"}, {"model", {{"N", 2}, {"gamma", 0.5}}}, {"lindblad", {{"steps", 6}}}},
         {"trajectory.csv", "time,trace,site,population"}},
        {json{{"task", "circuit-map"}}, {"circuit_map.csv", "quantity,value,unit"}},
    };
    for (const auto& [doc, expect] : cases) {
        TempDir dir;
        run_task(parse_config(doc), dir.path);
        CHECK(lines(slurp(dir.path / expect.first))[0] == expect.second);
    }
}

TEST_CASE("gap task summary") {
    TempDir dir;
    run_task(parse_config(json{{"task", "gap"}, {"model", {{"gamma", 1.0}}}}), dir.path);
    const json meta = json::parse(slurp(dir.path / "gap.meta.json"));
    CHECK(meta["summary"]["critical_mu"]["value"].get<double>() == doctest::Approx(std::sqrt(2.0)));
    CHECK(meta["summary"]["numeric"]["found"] == true);
    CHECK(meta["summary"]["numeric"]["mu"].get<double>() == doctest::Approx(std::sqrt(2.0)).epsilon(1e-6));
}

TEST_CASE("lindblad task cross-checks the integrator") {
    TempDir dir;
    run_task(parse_config(json{{"task", "lindblad-check"}, {"model", {{"N", 2}, {"gamma", 1.0}}}}), dir.path);
    const json s = json::parse(slurp(dir.path / "lindblad-check.meta.json"))["summary"];
    CHECK(s["exponential_oracle_difference"].get<double>() < 1e-8);
    CHECK(s["max_trace_drift"].get<double>() < 1e-8);
    CHECK(s["effective_model"]["single_excitation"].get<double>() < 1e-12);
    CHECK(lines(slurp(dir.path / "trajectory.csv")).size() == 1 + 51 * 2);
}

TEST_CASE("domain and path failures") {
    TempDir dir;
    CHECK_THROWS_AS(run_task(parse_config(json{{"task", "gbz"}, {"model", {{"delta", 0.0}}}}), dir.path), DomainError);
    CHECK(fs::is_empty(dir.path));
    std::ofstream(dir.path / "file") << "x";
    CHECK_THROWS_AS(run_task(parse_config(json{{"model", {{"N", 4}}}}), dir.path / "file" / "sub"), ConfigError);
}

TEST_CASE("task names") {
    for (auto t : {Task::spectrum, Task::sweep, Task::gap, Task::phase_diagram, Task::gbz, Task::populations,
                   Task::lindblad_check, Task::circuit_map})
        CHECK(parse_task(to_string(t)) == t);
    CHECK(to_string(Task::phase_diagram) == "phase-diagram");
}
