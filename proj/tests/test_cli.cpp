#include <doctest.h>

#include <cstdlib>
#include <fstream>
#include <sstream>
#include <sys/wait.h>

#include "roikit/depth_prior.hpp"
#include "roikit/kitti_io.hpp"
#include "roikit/pipeline.hpp"
#include "test_support.hpp"

using namespace roikit;

namespace {

std::string cli_path() {
    const char* env = std::getenv("ROIKIT_CLI");
    REQUIRE_MESSAGE(env != nullptr, "ROIKIT_CLI must point at the CLI binary");
    return env;
}

struct CliResult {
    int exit_code = -1;
    std::string output;  // stdout + stderr
};

CliResult run_cli(const std::string& args) {
    static std::atomic<int> counter{0};
    const auto capture = std::filesystem::temp_directory_path() /
                         ("roikit_cli_out_" + std::to_string(::getpid()) + "_" +
                          std::to_string(counter.fetch_add(1)) + ".txt");
    const std::string cmd = "\"" + cli_path() + "\" " + args + " > \"" + capture.string() +
                            "\" 2>&1";
    const int status = std::system(cmd.c_str());
    CliResult result;
    result.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    std::ifstream in(capture);
    std::stringstream ss;
    ss << in.rdbuf();
    result.output = ss.str();
    std::filesystem::remove(capture);
    return result;
}

}  // namespace

TEST_CASE("cli: no subcommand is a usage error (exit 2)") {
    CHECK(run_cli("").exit_code == 2);
    CHECK(run_cli("frobnicate").exit_code == 2);
}

TEST_CASE("cli augment: output bytes equal the in-process path") {
    auto fx = testsup::make_scene_fixture(401, 150, 20);
    const auto out_path = fx.dir / "aug.bin5";
    const auto r = run_cli("augment \"" + fx.cloud_path.string() + "\" \"" +
                           fx.calib_path.string() + "\" \"" + fx.depth_path.string() + "\" \"" +
                           out_path.string() + "\"");
    CHECK(r.exit_code == 0);
    CHECK(r.output.find("points=") != std::string::npos);
    CHECK(r.output.find("in_bounds_ratio=") != std::string::npos);

    const auto golden_path = fx.dir / "golden.bin5";
    const auto raw = read_point_cloud(fx.cloud_path);
    const auto calib = read_calibration(fx.calib_path);
    const auto raster = read_depth_raster(fx.depth_path);
    write_point5_cloud(golden_path, augment_points(raw, raster, calib));
    CHECK(testsup::read_file_bytes(out_path) == testsup::read_file_bytes(golden_path));
    CHECK(testsup::read_file_bytes(out_path).size() == raw.size() * 20);
}

TEST_CASE("cli augment: missing calibration file names the path, exit 2") {
    auto fx = testsup::make_scene_fixture(403, 50, 10);
    const auto r = run_cli("augment \"" + fx.cloud_path.string() + "\" \"/no/such/calib.txt\" \"" +
                           fx.depth_path.string() + "\" \"" + (fx.dir / "o.bin5").string() + "\"");
    CHECK(r.exit_code == 2);
    CHECK(r.output.find("/no/such/calib.txt") != std::string::npos);
}

TEST_CASE("cli pipeline: deterministic dumps across reruns and job counts") {
    auto fx = testsup::make_scene_fixture(405, 200, 40);
    const auto out1 = fx.dir / "o1";
    const auto out2 = fx.dir / "o2";
    const auto out8 = fx.dir / "o8";
    const std::string base = "pipeline --config \"" + fx.config_path.string() + "\" --seed 5";
    CHECK(run_cli(base + " --jobs 1 --out-dir \"" + out1.string() + "\"").exit_code == 0);
    CHECK(run_cli(base + " --jobs 1 --out-dir \"" + out2.string() + "\"").exit_code == 0);
    CHECK(run_cli(base + " --jobs 8 --out-dir \"" + out8.string() + "\"").exit_code == 0);

    for (const char* name :
         {"box_000_voxel.fvol", "box_000_point.fvol", "box_000_avg.fvol", "box_001_stage2.fvol"}) {
        const auto bytes = testsup::read_file_bytes(out1 / name);
        REQUIRE(!bytes.empty());
        CHECK(bytes == testsup::read_file_bytes(out2 / name));
        CHECK(bytes == testsup::read_file_bytes(out8 / name));
    }
}

TEST_CASE("cli pipeline: missing config is exit 2") {
    CHECK(run_cli("pipeline --config /no/such.cfg").exit_code == 2);
}

TEST_CASE("cli pipeline: dumps match an in-process run byte for byte") {
    auto fx = testsup::make_scene_fixture(406, 150, 30);
    const auto cli_out = fx.dir / "cli_out";
    const auto lib_out = fx.dir / "lib_out";
    CHECK(run_cli("pipeline --config \"" + fx.config_path.string() + "\" --out-dir \"" +
                  cli_out.string() + "\"").exit_code == 0);

    PipelineConfig cfg = parse_config(fx.config_path);
    cfg.out_dir = lib_out.string();
    const auto report = run_pipeline(cfg);
    CHECK(report.failure_count() == 0);

    size_t compared = 0;
    for (const auto& entry : std::filesystem::directory_iterator(lib_out)) {
        if (entry.path().extension() != ".fvol") continue;
        const auto bytes = testsup::read_file_bytes(entry.path());
        REQUIRE(!bytes.empty());
        CHECK(bytes == testsup::read_file_bytes(cli_out / entry.path().filename()));
        ++compared;
    }
    CHECK(compared == 12);  // 2 boxes x 6 volumes
}

TEST_CASE("cli selfcheck: passes, lists at least 10 checks, fault hook fails") {
    const auto ok = run_cli("selfcheck");
    CHECK(ok.exit_code == 0);
    size_t pass_lines = 0;
    std::istringstream lines(ok.output);
    std::string line;
    while (std::getline(lines, line)) {
        if (line.rfind("[PASS]", 0) == 0) ++pass_lines;
    }
    CHECK(pass_lines >= 10);

    const auto bad = run_cli("selfcheck --inject-fault");
    CHECK(bad.exit_code == 1);
    CHECK(bad.output.find("[FAIL] injected_fault") != std::string::npos);
}

TEST_CASE("cli init-weights: bundle loads back and covers the manifest") {
    auto fx = testsup::make_scene_fixture(407, 50, 10);
    const auto out = fx.dir / "weights.wbnd";
    const auto r = run_cli("init-weights --config \"" + fx.config_path.string() +
                           "\" --seed 12 --out \"" + out.string() + "\"");
    CHECK(r.exit_code == 0);
    const auto bundle = WeightBundle::load(out);
    const auto cfg = parse_config(fx.config_path);
    const auto manifest = pipeline_manifest(cfg, 5);
    CHECK(bundle.size() == manifest.size());
    for (const auto& spec : manifest) {
        CHECK(bundle.contains(spec.name));
        CHECK(bundle.at(spec.name).shape() == spec.shape);
    }

    // The pipeline accepts the bundle it wrote.
    std::ofstream append(fx.config_path, std::ios::app);
    append << "weights = " << out.string() << "\n";
    append.close();
    const auto run = run_cli("pipeline --config \"" + fx.config_path.string() + "\"");
    CHECK(run.exit_code == 0);
}

TEST_CASE("cli stats: CSV comes back well formed") {
    testsup::TempDir dir;
    const auto labels_dir = dir / "labels";
    const auto cloud_dir = dir / "clouds";
    const auto calib_dir = dir / "calibs";
    std::filesystem::create_directories(labels_dir);
    std::filesystem::create_directories(cloud_dir);
    std::filesystem::create_directories(calib_dir);
    const auto calib = testsup::write_test_calib(calib_dir / "000001.txt");
    const Box3D box(Vec3(10, 0, -0.5), 4.0, 2.0, 1.6, 0.2);
    testsup::write_text(labels_dir / "000001.txt", testsup::label_line("Car", box, calib));
    testsup::Rng rng(409);
    std::vector<RawPoint> cloud;
    for (int i = 0; i < 100; ++i) {
        cloud.push_back({10 + rng.uniform(-1.5, 1.5), rng.uniform(-0.8, 0.8),
                         -0.5 + rng.uniform(-0.6, 0.6), rng.uniform(0.0, 0.0999)});
    }
    write_point_cloud(cloud_dir / "000001.bin", cloud);

    const auto csv = dir / "stats.csv";
    const auto r = run_cli("stats --labels-dir \"" + labels_dir.string() + "\" --cloud-dir \"" +
                           cloud_dir.string() + "\" --calib-dir \"" + calib_dir.string() +
                           "\" --out \"" + csv.string() + "\"");
    CHECK(r.exit_code == 0);

    std::ifstream in(csv);
    std::string header;
    std::getline(in, header);
    CHECK(header == "class,bin_lo,bin_hi,count,fraction");
    size_t rows = 0;
    size_t car_count = 0;
    std::string line;
    while (std::getline(in, line)) {
        ++rows;
        if (line.rfind("Car,", 0) == 0) {
            std::istringstream fields(line);
            std::string cls, lo, hi, count;
            std::getline(fields, cls, ',');
            std::getline(fields, lo, ',');
            std::getline(fields, hi, ',');
            std::getline(fields, count, ',');
            car_count += size_t(std::stoul(count));
        }
    }
    CHECK(rows == 80);
    CHECK(car_count == 100);
}

TEST_CASE("cli bench: emits the full component table") {
    auto fx = testsup::make_scene_fixture(411, 80, 20);
    const auto csv = fx.dir / "bench.csv";
    const auto r = run_cli("bench --config \"" + fx.config_path.string() +
                           "\" --repeat 3 --out \"" + csv.string() + "\"");
    CHECK(r.exit_code == 0);
    std::ifstream in(csv);
    std::string line;
    std::getline(in, line);
    CHECK(line == "component,stages,median_ms");
    std::vector<std::string> rows;
    while (std::getline(in, line)) rows.push_back(line);
    REQUIRE(rows.size() == 7);
    CHECK(rows[3].rfind("pointgfe,3,", 0) == 0);
    CHECK(rows[4].rfind("aware_pool,3,", 0) == 0);
    CHECK(rows[6].rfind("bgrf,3,", 0) == 0);
}
