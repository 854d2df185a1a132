#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "roikit/depth_prior.hpp"
#include "roikit/kitti_io.hpp"
#include "roikit/nn.hpp"
#include "roikit/pipeline.hpp"
#include "roikit/selfcheck.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitCheckFailure = 1;
constexpr int kExitUsage = 2;

int cmd_augment(const std::string& cloud, const std::string& calib, const std::string& depth,
                const std::string& out) {
    const auto points = roikit::read_point_cloud(cloud);
    const auto calibration = roikit::read_calibration(calib);
    const auto raster = roikit::read_depth_raster(depth);
    const auto augmented = roikit::augment_points(points, raster, calibration);

    size_t with_prior = 0;
    for (const auto& p : augmented) {
        if (p.d_da > 0.0) ++with_prior;
    }
    roikit::write_point5_cloud(out, augmented);
    const double ratio = augmented.empty() ? 0.0 : double(with_prior) / double(augmented.size());
    std::cout << "points=" << augmented.size() << " in_bounds_ratio=" << ratio << "\n";
    return kExitOk;
}

int cmd_pipeline(roikit::PipelineConfig cfg) {
    const auto report = roikit::run_pipeline(cfg);
    std::cout << "boxes=" << report.boxes.size() << " failed=" << report.failure_count() << "\n";
    for (const auto& box : report.boxes) {
        if (!box.ok) {
            std::cerr << "box " << box.box_index << " failed: " << box.error << "\n";
        }
    }
    return report.failure_count() == 0 ? kExitOk : kExitCheckFailure;
}

int cmd_stats(const std::string& labels_dir, const std::string& cloud_dir,
              const std::string& calib_dir, const std::string& out, int bins) {
    std::vector<std::string> unmatched;
    const auto frames = roikit::pair_frames(labels_dir, cloud_dir, calib_dir, &unmatched);
    for (const auto& stem : unmatched) {
        std::cerr << "warning: frame " << stem << " has no matching cloud/calib, skipped\n";
    }
    const auto rows = roikit::reflectance_stats(frames, bins);
    roikit::write_stats_csv(out, rows);
    std::cout << "frames=" << frames.size() << " rows=" << rows.size() << "\n";
    return kExitOk;
}

int cmd_bench(const roikit::PipelineConfig& cfg, int repeat, const std::string& out) {
    const auto rows = roikit::run_bench(cfg, repeat);
    roikit::write_bench_csv(out, rows);
    for (const auto& row : rows) {
        std::cout << row.component << " stages=" << row.stages << " median_ms=" << row.median_ms
                  << "\n";
    }
    return kExitOk;
}

int cmd_selfcheck(bool inject_fault) {
    const auto results = roikit::run_selfcheck(inject_fault);
    size_t failed = 0;
    for (const auto& r : results) {
        std::cout << (r.passed ? "[PASS] " : "[FAIL] ") << r.name;
        if (!r.passed) std::cout << " -- " << r.detail;
        std::cout << "\n";
        if (!r.passed) ++failed;
    }
    std::cout << results.size() - failed << "/" << results.size() << " checks passed\n";
    return failed == 0 ? kExitOk : kExitCheckFailure;
}

// Channel count of the first record in a voxel feature file; 5 when no
// file is given (the voxelizer's mean stand-in width).
int voxel_feature_channels(const std::string& path) {
    if (path.empty()) return 5;
    std::ifstream in(path);
    if (!in) throw roikit::FormatError("cannot open " + path);
    std::string line;
    while (std::getline(in, line)) {
        std::istringstream iss(line);
        std::string tok;
        int tokens = 0;
        while (iss >> tok) ++tokens;
        if (tokens > 3) return tokens - 3;
    }
    return 5;
}

int cmd_init_weights(const roikit::PipelineConfig& cfg, uint64_t seed, const std::string& out,
                     int c_map) {
    if (c_map <= 0) c_map = voxel_feature_channels(cfg.voxel_features_path);
    const auto manifest = roikit::pipeline_manifest(cfg, c_map);
    const auto bundle = roikit::nn::seeded_init(seed, manifest);
    bundle.save(out);
    std::cout << "tensors=" << bundle.size() << " file=" << out << "\n";
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Deterministic point-cloud RoI feature extraction pipeline"};
    app.require_subcommand(1);

    // augment
    auto* augment = app.add_subcommand("augment", "Append sampled depth priors to a point cloud");
    std::string aug_cloud, aug_calib, aug_depth, aug_out;
    augment->add_option("cloud", aug_cloud, "velodyne .bin file")->required();
    augment->add_option("calib", aug_calib, "calibration .txt file")->required();
    augment->add_option("depth", aug_depth, "depth raster .dpr file")->required();
    augment->add_option("out", aug_out, "output .bin5 file")->required();

    // pipeline
    auto* pipeline = app.add_subcommand("pipeline", "Run dual-path extraction and gated fusion");
    std::string pipe_config, pipe_out_dir;
    uint64_t pipe_seed = 0;
    int pipe_jobs = 0;
    pipeline->add_option("--config", pipe_config, "pipeline config file")->required();
    pipeline->add_option("--seed", pipe_seed, "override the config seed");
    pipeline->add_option("--jobs", pipe_jobs, "override the config worker count");
    pipeline->add_option("--out-dir", pipe_out_dir, "override the config output directory");

    // stats
    auto* stats = app.add_subcommand("stats", "Reflectance histograms per class");
    std::string stats_labels, stats_clouds, stats_calibs, stats_out;
    int stats_bins = 20;
    stats->add_option("--labels-dir", stats_labels, "directory of label .txt files")->required();
    stats->add_option("--cloud-dir", stats_clouds, "directory of velodyne .bin files")->required();
    stats->add_option("--calib-dir", stats_calibs, "directory of calib .txt files")->required();
    stats->add_option("--out", stats_out, "output CSV path")->required();
    stats->add_option("--bins", stats_bins, "histogram bin count (default 20)");

    // bench
    auto* bench = app.add_subcommand("bench", "Per-component timing breakdown");
    std::string bench_config, bench_out;
    int bench_repeat = 5;
    bench->add_option("--config", bench_config, "pipeline config file")->required();
    bench->add_option("--repeat", bench_repeat, "repetitions (>= 3, default 5)");
    bench->add_option("--out", bench_out, "output CSV path")->required();

    // selfcheck
    auto* selfcheck = app.add_subcommand("selfcheck", "Run the embedded verification suites");
    bool inject_fault = false;
    selfcheck->add_flag("--inject-fault", inject_fault, "test hook: add a failing check")
        ->group("");  // hidden

    // init-weights
    auto* init_weights = app.add_subcommand("init-weights", "Write a seeded weight bundle");
    std::string iw_config, iw_out;
    uint64_t iw_seed = 0;
    int iw_cmap = 0;
    init_weights->add_option("--config", iw_config, "pipeline config file (defaults used if absent)");
    init_weights->add_option("--seed", iw_seed, "PRNG seed");
    init_weights->add_option("--out", iw_out, "output bundle path")->required();
    init_weights->add_option("--cmap", iw_cmap, "voxel-map channel count override");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (*augment) return cmd_augment(aug_cloud, aug_calib, aug_depth, aug_out);
        if (*pipeline) {
            roikit::PipelineConfig cfg = roikit::parse_config(pipe_config);
            if (pipeline->count("--seed")) cfg.seed = pipe_seed;
            if (pipeline->count("--jobs")) cfg.jobs = pipe_jobs;
            if (pipeline->count("--out-dir")) cfg.out_dir = pipe_out_dir;
            return cmd_pipeline(std::move(cfg));
        }
        if (*stats) return cmd_stats(stats_labels, stats_clouds, stats_calibs, stats_out,
                                     stats_bins);
        if (*bench) return cmd_bench(roikit::parse_config(bench_config), bench_repeat, bench_out);
        if (*selfcheck) return cmd_selfcheck(inject_fault);
        if (*init_weights) {
            roikit::PipelineConfig cfg;
            if (!iw_config.empty()) cfg = roikit::parse_config(iw_config);
            if (init_weights->count("--seed")) cfg.seed = iw_seed;
            return cmd_init_weights(cfg, cfg.seed, iw_out, iw_cmap);
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    }
    return kExitUsage;
}
