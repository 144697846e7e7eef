#include <catch2/catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "szegolab/experiment.hpp"

using namespace szegolab;
namespace fs = std::filesystem;

namespace {

nlohmann::json base_config() {
    return nlohmann::json::parse(R"({
        "instance": {"n": 1, "mu": ["1", "sqrt2"]},
        "points": [{"t": ["1", "0"]}, {"t": ["0", "1"]}, {"t": ["0.5", "0.5"]}],
        "k_list": ["20", "40"],
        "quadrature_degree": 40,
        "tolerance": "0.25"
    })");
}

std::string read_file(const fs::path& p) {
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

struct TempDir {
    fs::path path;
    explicit TempDir(const std::string& tag) {
        path = fs::temp_directory_path() / ("szegolab_test_" + tag);
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
};

RunContext context_for(const nlohmann::json& j, const fs::path& out) {
    RunContext ctx;
    ctx.cfg = ExperimentConfig::from_json(j);
    ctx.out_dir = out.string();
    static std::ostringstream sink;
    ctx.out = &sink;
    ctx.warn = &sink;
    return ctx;
}

}  // namespace

TEST_CASE("real expression whitelist") {
    CHECK(parse_real_expr("1").value == 1.0);
    CHECK(parse_real_expr("0.25").value == 0.25);
    CHECK(parse_real_expr("3/4").value == 0.75);
    CHECK(parse_real_expr("sqrt2").value == Catch::Approx(std::sqrt(2.0)).epsilon(1e-16));
    CHECK(parse_real_expr("sqrt2/2").value == Catch::Approx(std::sqrt(0.5)).epsilon(1e-15));
    CHECK_THROWS_AS(parse_real_expr("two"), ConfigError);
    CHECK_THROWS_AS(parse_real_expr("1/0"), ConfigError);
}

TEST_CASE("config validation") {
    CHECK_NOTHROW(ExperimentConfig::from_json(base_config()));

    auto bad_k = base_config();
    bad_k["k_list"] = {"40", "20"};
    CHECK_THROWS_AS(ExperimentConfig::from_json(bad_k), ConfigError);

    auto bad_degree = base_config();
    bad_degree["quadrature_degree"] = 10;
    CHECK_THROWS_AS(ExperimentConfig::from_json(bad_degree), ConfigError);

    auto bad_mc = base_config();
    bad_mc["monte_carlo"] = {{"samples", 10000}};  // no seed
    CHECK_THROWS_AS(ExperimentConfig::from_json(bad_mc), ConfigError);

    auto bad_mu = base_config();
    bad_mu["instance"]["mu"] = {"1", "sqrt2", "2"};
    CHECK_THROWS_AS(ExperimentConfig::from_json(bad_mu), ConfigError);

    CHECK_THROWS_AS(ExperimentConfig::from_json(nlohmann::json::object()), ConfigError);

    // diagonal shorthand expands to the full torus
    auto diag = base_config();
    diag["instance"]["mu"] = {"1"};
    ExperimentConfig cfg = ExperimentConfig::from_json(diag);
    CHECK(cfg.weights().dim() == 2);
    CHECK(cfg.mu_labels() == std::vector<std::string>{"1", "1"});
}

TEST_CASE("run_geometry emits the per-point table") {
    TempDir dir("geometry");
    auto j = base_config();
    RunContext ctx = context_for(j, dir.path);
    CHECK(run_geometry(ctx) == 0);
    std::string csv = read_file(dir.path / "geometry.csv");
    CHECK(csv.find("point_id,m,det_levi,volume_density") == 0);
    // second point is t=(0,1): m = sqrt2
    std::istringstream lines(csv);
    std::string line;
    std::getline(lines, line);
    std::getline(lines, line);
    std::getline(lines, line);
    CHECK(line.find("1,1.41421356") == 0);

    // empty point list: header only, exit 0
    auto empty = base_config();
    empty["points"] = nlohmann::json::array();
    TempDir dir2("geometry_empty");
    RunContext ctx2 = context_for(empty, dir2.path);
    CHECK(run_geometry(ctx2) == 0);
    std::string csv2 = read_file(dir2.path / "geometry.csv");
    CHECK(csv2 == "point_id,m,det_levi,volume_density\n");
}

TEST_CASE("geometry on the diagonal sphere has constant det_levi 0.5") {
    TempDir dir("geometry_diag");
    auto j = base_config();
    j["instance"]["mu"] = {"1"};
    j["points"] = {{{"t", {"1", "0"}}}, {{"t", {"0.3", "0.7"}}}, {{"t", {"0.5", "0.5"}}}};
    RunContext ctx = context_for(j, dir.path);
    CHECK(run_geometry(ctx) == 0);
    std::istringstream lines(read_file(dir.path / "geometry.csv"));
    std::string line;
    std::getline(lines, line);  // header
    while (std::getline(lines, line)) {
        auto c1 = line.find(','), c2 = line.find(',', line.find(',') + 1);
        double det = std::stod(line.substr(c2 + 1));
        CHECK(det == Catch::Approx(0.5).margin(1e-6));
    }
}

TEST_CASE("run_sweep is deterministic and caches the norm table") {
    auto j = base_config();
    TempDir dir_a("sweep_a"), dir_b("sweep_b");
    RunContext ca = context_for(j, dir_a.path);
    CHECK(run_sweep(ca) == 0);
    RunContext cb = context_for(j, dir_b.path);
    CHECK(run_sweep(cb) == 0);
    CHECK(read_file(dir_a.path / "sweep.csv") == read_file(dir_b.path / "sweep.csv"));

    // warm cache: rerunning in the same directory reuses the table and the
    // output is byte-identical
    std::string cold = read_file(dir_a.path / "sweep.csv");
    std::string cache_before = read_file(dir_a.path / "norm_table.csv");
    RunContext cw = context_for(j, dir_a.path);
    CHECK(run_sweep(cw) == 0);
    CHECK(read_file(dir_a.path / "sweep.csv") == cold);
    CHECK(read_file(dir_a.path / "norm_table.csv") == cache_before);

    // k = 20 row on the diagonal of S_k column equals the closed form when mu=(1)
    auto diag = base_config();
    diag["instance"]["mu"] = {"1"};
    diag["points"] = {{{"t", {"0.5", "0.5"}}}};
    diag["k_list"] = {"2"};
    TempDir dir_c("sweep_diag");
    RunContext cc = context_for(diag, dir_c.path);
    CHECK(run_sweep(cc) == 0);
    std::istringstream lines(read_file(dir_c.path / "sweep.csv"));
    std::string line;
    std::getline(lines, line);
    std::getline(lines, line);
    double sk = std::stod(line.substr(line.rfind(',') + 1));
    CHECK(sk == Catch::Approx(3.0 / (2.0 * kPi * kPi)).epsilon(1e-10));
}

TEST_CASE("worker count does not change runner output bytes") {
    auto j = base_config();
    TempDir d1("workers1"), d4("workers4");
    RunContext c1 = context_for(j, d1.path);
    c1.workers = 1;
    CHECK(run_sweep(c1) == 0);
    RunContext c4 = context_for(j, d4.path);
    c4.workers = 4;
    CHECK(run_sweep(c4) == 0);
    CHECK(read_file(d1.path / "sweep.csv") == read_file(d4.path / "sweep.csv"));
    CHECK(read_file(d1.path / "norm_table.csv") == read_file(d4.path / "norm_table.csv"));
}

TEST_CASE("cache mismatch triggers a rebuild with a warning") {
    auto j = base_config();
    TempDir dir("cache_mismatch");
    RunContext ctx = context_for(j, dir.path);
    CHECK(run_sweep(ctx) == 0);

    auto j2 = j;
    j2["instance"]["mu"] = {"1", "3/2"};
    std::ostringstream warnings;
    RunContext ctx2 = context_for(j2, dir.path);
    ctx2.warn = &warnings;
    CHECK(run_sweep(ctx2) == 0);
    CHECK(warnings.str().find("mismatch") != std::string::npos);
    // and the cache now carries the new key
    auto key = NormTable::peek_csv((dir.path / "norm_table.csv").string());
    REQUIRE(key.has_value());
    CHECK(key->mu_joined == "1;3/2");
}

TEST_CASE("tau column appears only when tau is configured") {
    auto j = base_config();
    TempDir dir("sweep_tau");
    RunContext ctx = context_for(j, dir.path);
    CHECK(run_sweep(ctx) == 0);
    CHECK(read_file(dir.path / "sweep.csv").find("S_k_tau") == std::string::npos);

    j["tau"] = {{"family", "smooth_bump"}, {"a", "0.1"}, {"b", "0.9"}};
    TempDir dir2("sweep_tau2");
    RunContext ctx2 = context_for(j, dir2.path);
    CHECK(run_sweep(ctx2) == 0);
    CHECK(read_file(dir2.path / "sweep.csv").find("S_k_tau") != std::string::npos);
}

TEST_CASE("run_verify exit codes") {
    // generous tolerance at small k: the fit is crude but inside 25%
    auto j = base_config();
    j["k_list"] = {"150", "300"};
    TempDir dir("verify_ok");
    RunContext ctx = context_for(j, dir.path);
    CHECK(run_verify(ctx) == 0);
    std::string report = read_file(dir.path / "report.json");
    CHECK(report.find("\"pass\": true") != std::string::npos);

    // tolerance 0 makes any nonzero relative error fail with exit 1
    RunContext strict = context_for(j, dir.path);
    strict.tolerance_override = 0.0;
    CHECK(run_verify(strict) == 1);

    // a monte_carlo block adds the seeded volume cross-check to the report
    auto with_mc = j;
    with_mc["monte_carlo"] = {{"samples", 20000}, {"seed", 99}};
    TempDir dir_mc("verify_mc");
    RunContext cmc = context_for(with_mc, dir_mc.path);
    CHECK(run_verify(cmc) == 0);
    auto rep = nlohmann::json::parse(read_file(dir_mc.path / "report.json"));
    CHECK(rep["monte_carlo"]["within_4_stderr"].get<bool>());
    CHECK(rep["monte_carlo"]["std_error"].get<double>() > 0.0);

    // fewer than two k entries is a config error
    auto short_k = base_config();
    short_k["k_list"] = {"20"};
    TempDir dir2("verify_short");
    RunContext ctx2 = context_for(short_k, dir2.path);
    CHECK_THROWS_AS(run_verify(ctx2), ConfigError);
}

TEST_CASE("model-only config runs the model checks") {
    nlohmann::json j = nlohmann::json::parse(R"({
        "model": {
            "lambda": ["1"],
            "weight_matrix": [[["0.4", "0"]]],
            "samples": 25,
            "seed": 11
        }
    })");
    TempDir dir("model_only");
    RunContext ctx = context_for(j, dir.path);
    CHECK(run_model_verify(ctx) == 0);
    auto report = nlohmann::json::parse(read_file(dir.path / "report.json"));
    CHECK(report["model"]["pass"].get<bool>());
    CHECK(report["model"]["max_ratio"].get<double>() > 0.0);
    CHECK(report["model"]["max_ratio"].get<double>() <=
          report["model"]["bound"].get<double>() * (1.0 + 1e-9));

    // missing model block
    TempDir dir2("model_missing");
    RunContext ctx2 = context_for(base_config(), dir2.path);
    CHECK_THROWS_AS(run_model_verify(ctx2), ConfigError);
}
