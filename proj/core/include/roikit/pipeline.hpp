#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "roikit/gated_fusion.hpp"
#include "roikit/pointgfe.hpp"
#include "roikit/roi_pooling.hpp"
#include "roikit/types.hpp"
#include "roikit/voxelgrid.hpp"

namespace roikit {

// Everything a batch run needs. Parsed from a flat key-value text file;
// see parse_config for the key set.
struct PipelineConfig {
    std::string cloud_path;
    std::string calib_path;
    std::string depth_path;
    std::string label_path;           // optional; boxes also come from `box` keys
    std::string weights_path;         // optional; defaults to seeded_init(seed)
    std::string voxel_features_path;  // optional; replaces the mean stand-in

    GridSpec grid = GridSpec::kitti_default();
    PointGfeConfig gfe;
    RoiPoolConfig pool;
    GateMode gate_mode = GateMode::independent_sigmoid;
    int bgrf_cu = 0;  // unify width of the gating path; 0 = channel width

    std::vector<Box3D> config_boxes;

    uint64_t seed = 0;
    int jobs = 1;
    std::string out_dir = ".";

    void validate() const;
};

// Flat "key = value" lines, '#' comments. Keys:
//   cloud, calib, depth, labels, weights, voxel_features, out_dir
//   grid.origin, grid.voxel_size (3 floats each), grid.extent (3 ints)
//   gfe.radius, gfe.k, gfe.widths (3 ints), gfe.hidden_widths (3 ints)
//   pool.n, pool.m, pool.radius, pool.k, pool.margin
//   gate_mode (sigmoid | softmax), bgrf.cu, seed, jobs
//   box = cx cy cz l w h yaw   (repeatable)
PipelineConfig parse_config(const std::filesystem::path& path);

// Full weight manifest for a config: three encoder stage MLPs, the
// point-path downsampler, and three fusion stages (plus a channel
// adapter when the voxel map width c_map differs from the encoder
// output width).
std::vector<TensorSpec> pipeline_manifest(const PipelineConfig& cfg, int c_map);

// The boxes a run operates on: label-file boxes (DontCare skipped)
// followed by config boxes.
std::vector<Box3D> collect_boxes(const PipelineConfig& cfg, const CalibrationSet& calib);

struct BoxRunResult {
    size_t box_index = 0;
    bool ok = false;
    std::string error;
    size_t point_count = 0;
    double millis = 0.0;
};

struct PipelineReport {
    std::vector<BoxRunResult> boxes;
    size_t failure_count() const;
};

// Runs the full per-box pipeline and writes, per box i,
// box_<i>_{voxel,point,stage1,stage2,stage3,avg}.fvol plus a
// manifest.csv of per-box timings into cfg.out_dir. Boxes are processed
// in parallel across cfg.jobs workers; files are written by a single
// collector in box order, so dumps are byte-identical for any job
// count. Per-box failures are recorded and the run continues.
PipelineReport run_pipeline(const PipelineConfig& cfg);

// --- reflectance statistics ---------------------------------------------

struct StatsFrame {
    std::filesystem::path labels;
    std::filesystem::path cloud;
    std::filesystem::path calib;
};

struct StatsRow {
    ClassLabel label = ClassLabel::Other;
    double bin_lo = 0.0;
    double bin_hi = 0.0;
    size_t count = 0;
    double fraction = 0.0;
};

// Pairs files by stem across the three directories. Stems present in
// labels_dir but missing a cloud or calib are reported in `unmatched`
// and skipped.
std::vector<StatsFrame> pair_frames(const std::filesystem::path& labels_dir,
                                    const std::filesystem::path& cloud_dir,
                                    const std::filesystem::path& calib_dir,
                                    std::vector<std::string>* unmatched);

// Histogram of the reflectance of points inside ground-truth boxes,
// per class, `bins` uniform bins over [0, 1] (last bin closed). The
// fraction column normalizes by the per-class total; zero-count classes
// keep their rows with fraction 0. DontCare boxes are ignored.
std::vector<StatsRow> reflectance_stats(std::span<const StatsFrame> frames, int bins = 20);

void write_stats_csv(const std::filesystem::path& path, std::span<const StatsRow> rows);

// --- per-component timing ------------------------------------------------

struct BenchRow {
    std::string component;
    int stages = 1;  // executions accumulated per repeat
    double median_ms = 0.0;
};

// Median wall time per pipeline component over `repeat` runs
// (repeat >= 3). pointgfe and aware_pool are accumulated over three
// executions and bgrf over its three cascade stages, mirroring how the
// multi-stage pipeline spends its time; the other components run once.
std::vector<BenchRow> run_bench(const PipelineConfig& cfg, int repeat);

void write_bench_csv(const std::filesystem::path& path, std::span<const BenchRow> rows);

}  // namespace roikit
