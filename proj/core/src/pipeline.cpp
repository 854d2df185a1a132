#include "roikit/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <set>
#include <sstream>
#include <thread>

#include "roikit/depth_prior.hpp"
#include "roikit/geometry.hpp"
#include "roikit/kitti_io.hpp"

namespace roikit {
namespace {

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point start) {
    return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

std::string trim(const std::string& s) {
    const auto begin = s.find_first_not_of(" \t\r");
    if (begin == std::string::npos) return "";
    const auto end = s.find_last_not_of(" \t\r");
    return s.substr(begin, end - begin + 1);
}

std::vector<double> parse_numbers(const std::string& value, size_t expected,
                                  const std::string& key, size_t line_no) {
    std::istringstream iss(value);
    std::vector<double> out;
    std::string tok;
    while (iss >> tok) {
        double v = 0.0;
        auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
        if (ec != std::errc() || ptr != tok.data() + tok.size()) {
            throw FormatError("config line " + std::to_string(line_no) + ": bad number '" + tok +
                              "' for key " + key);
        }
        out.push_back(v);
    }
    if (expected != 0 && out.size() != expected) {
        throw FormatError("config line " + std::to_string(line_no) + ": key " + key +
                          " expects " + std::to_string(expected) + " values");
    }
    return out;
}

double median_of(std::vector<double> values) {
    std::sort(values.begin(), values.end());
    const size_t n = values.size();
    if (n % 2 == 1) return values[n / 2];
    return 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

}  // namespace

void PipelineConfig::validate() const {
    if (cloud_path.empty()) throw FormatError("config is missing 'cloud'");
    if (calib_path.empty()) throw FormatError("config is missing 'calib'");
    if (depth_path.empty()) throw FormatError("config is missing 'depth'");
    if (jobs < 1) throw FormatError("jobs must be >= 1");
    grid.validate();
    gfe.validate();
    pool.validate();
}

PipelineConfig parse_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw FormatError("cannot open config " + path.string());

    PipelineConfig cfg;
    std::string line;
    size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.resize(hash);
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            if (!trim(line).empty()) {
                throw FormatError("config line " + std::to_string(line_no) +
                                  ": expected 'key = value'");
            }
            continue;
        }
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty() || value.empty()) {
            throw FormatError("config line " + std::to_string(line_no) + ": empty key or value");
        }

        if (key == "cloud") cfg.cloud_path = value;
        else if (key == "calib") cfg.calib_path = value;
        else if (key == "depth") cfg.depth_path = value;
        else if (key == "labels") cfg.label_path = value;
        else if (key == "weights") cfg.weights_path = value;
        else if (key == "voxel_features") cfg.voxel_features_path = value;
        else if (key == "out_dir") cfg.out_dir = value;
        else if (key == "grid.origin") {
            const auto v = parse_numbers(value, 3, key, line_no);
            cfg.grid.origin = Vec3(v[0], v[1], v[2]);
        } else if (key == "grid.voxel_size") {
            const auto v = parse_numbers(value, 3, key, line_no);
            cfg.grid.voxel_size = Vec3(v[0], v[1], v[2]);
        } else if (key == "grid.extent") {
            const auto v = parse_numbers(value, 3, key, line_no);
            cfg.grid.extent = Vec3i(int(v[0]), int(v[1]), int(v[2]));
        } else if (key == "gfe.radius") {
            cfg.gfe.radius = parse_numbers(value, 1, key, line_no)[0];
        } else if (key == "gfe.k") {
            cfg.gfe.k = int(parse_numbers(value, 1, key, line_no)[0]);
        } else if (key == "gfe.widths") {
            const auto v = parse_numbers(value, 3, key, line_no);
            cfg.gfe.stage_widths = {int(v[0]), int(v[1]), int(v[2])};
        } else if (key == "gfe.hidden_widths") {
            const auto v = parse_numbers(value, 3, key, line_no);
            cfg.gfe.hidden_widths = {int(v[0]), int(v[1]), int(v[2])};
        } else if (key == "pool.n") {
            cfg.pool.n = int(parse_numbers(value, 1, key, line_no)[0]);
        } else if (key == "pool.m") {
            cfg.pool.m = int(parse_numbers(value, 1, key, line_no)[0]);
        } else if (key == "pool.radius") {
            cfg.pool.grid_query_radius = parse_numbers(value, 1, key, line_no)[0];
        } else if (key == "pool.k") {
            cfg.pool.grid_query_k = int(parse_numbers(value, 1, key, line_no)[0]);
        } else if (key == "pool.margin") {
            cfg.pool.margin = parse_numbers(value, 1, key, line_no)[0];
        } else if (key == "gate_mode") {
            cfg.gate_mode = gate_mode_from_string(value);
        } else if (key == "bgrf.cu") {
            cfg.bgrf_cu = int(parse_numbers(value, 1, key, line_no)[0]);
        } else if (key == "seed") {
            cfg.seed = uint64_t(parse_numbers(value, 1, key, line_no)[0]);
        } else if (key == "jobs") {
            cfg.jobs = int(parse_numbers(value, 1, key, line_no)[0]);
        } else if (key == "box") {
            const auto v = parse_numbers(value, 7, key, line_no);
            cfg.config_boxes.emplace_back(Vec3(v[0], v[1], v[2]), v[3], v[4], v[5], v[6]);
        } else {
            throw FormatError("config line " + std::to_string(line_no) + ": unknown key '" + key +
                              "'");
        }
    }
    return cfg;
}

std::vector<TensorSpec> pipeline_manifest(const PipelineConfig& cfg, int c_map) {
    std::vector<TensorSpec> manifest = pointgfe_manifest(cfg.gfe);
    const int total = cfg.gfe.total_width();
    for (auto& spec : downsample_manifest(total)) manifest.push_back(std::move(spec));
    for (auto& spec : bgrf_manifest(total, cfg.bgrf_cu, c_map)) manifest.push_back(std::move(spec));
    return manifest;
}

std::vector<Box3D> collect_boxes(const PipelineConfig& cfg, const CalibrationSet& calib) {
    std::vector<Box3D> boxes;
    if (!cfg.label_path.empty()) {
        for (const LabeledBox& lb : read_labels(cfg.label_path, calib)) {
            if (!lb.dont_care) boxes.push_back(lb.box);
        }
    }
    boxes.insert(boxes.end(), cfg.config_boxes.begin(), cfg.config_boxes.end());
    return boxes;
}

size_t PipelineReport::failure_count() const {
    size_t n = 0;
    for (const BoxRunResult& r : boxes) {
        if (!r.ok) ++n;
    }
    return n;
}

namespace {

struct BoxOutput {
    RoiFeaturePair pair;
    CascadeOutput fused;
    BoxRunResult result;
};

}  // namespace

PipelineReport run_pipeline(const PipelineConfig& cfg) {
    cfg.validate();

    const auto raw = read_point_cloud(cfg.cloud_path);
    const auto calib = read_calibration(cfg.calib_path);
    const auto raster = read_depth_raster(cfg.depth_path);
    const auto points = augment_points(raw, raster, calib);

    SparseVoxelMap map = voxelize(points, cfg.grid);
    if (map.dropped_points() > 0) {
        std::cerr << "warning: " << map.dropped_points()
                  << " points fell outside the voxel grid extent and were dropped\n";
    }
    if (!cfg.voxel_features_path.empty()) {
        map = load_voxel_features(map, cfg.voxel_features_path);
    }

    const auto boxes = collect_boxes(cfg, calib);

    WeightBundle bundle;
    if (!cfg.weights_path.empty()) {
        bundle = WeightBundle::load(cfg.weights_path);
    } else {
        const auto manifest = pipeline_manifest(cfg, int(map.channels()));
        bundle = nn::seeded_init(cfg.seed, manifest);
    }

    const RoiExtractor extractor(points, map, bundle, cfg.gfe, cfg.pool);
    const bool adapt = int(map.channels()) != cfg.gfe.total_width();
    const Tensor* adapt_W = adapt ? &bundle.at("bgrf.adapt_v.W") : nullptr;
    const Tensor* adapt_b = adapt ? &bundle.at("bgrf.adapt_v.b") : nullptr;
    const std::array<BgrfStageWeights, 3> stages = {BgrfStageWeights::from_bundle(bundle, 1),
                                                    BgrfStageWeights::from_bundle(bundle, 2),
                                                    BgrfStageWeights::from_bundle(bundle, 3)};

    std::vector<BoxOutput> outputs(boxes.size());
    std::atomic<size_t> next{0};
    auto worker = [&]() {
        for (size_t i = next.fetch_add(1); i < boxes.size(); i = next.fetch_add(1)) {
            BoxOutput& out = outputs[i];
            out.result.box_index = i;
            const auto start = Clock::now();
            try {
                out.pair = extractor.extract(boxes[i]);
                const FeatureVolume fused_input =
                    adapt ? adapt_channels(out.pair.voxel_volume, *adapt_W, *adapt_b)
                          : out.pair.voxel_volume;
                out.fused = cascade(fused_input, out.pair.point_volume, stages, cfg.gate_mode);
                out.result.ok = true;
                out.result.point_count = out.pair.point_count;
            } catch (const std::exception& e) {
                out.result.ok = false;
                out.result.error = e.what();
            }
            out.result.millis = ms_since(start);
        }
    };

    const size_t n_threads = std::min<size_t>(size_t(cfg.jobs), std::max<size_t>(boxes.size(), 1));
    std::vector<std::thread> pool;
    pool.reserve(n_threads);
    for (size_t t = 0; t < n_threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();

    // Single collector keeps the dumps byte-identical for any job count.
    const std::filesystem::path out_dir(cfg.out_dir);
    std::filesystem::create_directories(out_dir);
    std::ofstream manifest(out_dir / "manifest.csv", std::ios::trunc);
    if (!manifest) throw FormatError("cannot write manifest in " + cfg.out_dir);
    manifest << "box,status,point_count,millis,error\n";

    PipelineReport report;
    char stem[32];
    for (size_t i = 0; i < outputs.size(); ++i) {
        const BoxOutput& out = outputs[i];
        std::snprintf(stem, sizeof(stem), "box_%03zu", i);
        if (out.result.ok) {
            out.pair.voxel_volume.save(out_dir / (std::string(stem) + "_voxel.fvol"));
            out.pair.point_volume.save(out_dir / (std::string(stem) + "_point.fvol"));
            for (int s = 0; s < 3; ++s) {
                out.fused.stages[size_t(s)].save(
                    out_dir / (std::string(stem) + "_stage" + std::to_string(s + 1) + ".fvol"));
            }
            out.fused.average.save(out_dir / (std::string(stem) + "_avg.fvol"));
        }
        manifest << i << "," << (out.result.ok ? "ok" : "error") << "," << out.result.point_count
                 << "," << std::fixed << std::setprecision(3) << out.result.millis << ","
                 << out.result.error << "\n";
        report.boxes.push_back(out.result);
    }
    return report;
}

std::vector<StatsFrame> pair_frames(const std::filesystem::path& labels_dir,
                                    const std::filesystem::path& cloud_dir,
                                    const std::filesystem::path& calib_dir,
                                    std::vector<std::string>* unmatched) {
    std::set<std::string> stems;
    for (const auto& entry : std::filesystem::directory_iterator(labels_dir)) {
        if (entry.path().extension() == ".txt") stems.insert(entry.path().stem().string());
    }
    std::vector<StatsFrame> frames;
    for (const std::string& stem : stems) {
        StatsFrame f;
        f.labels = labels_dir / (stem + ".txt");
        f.cloud = cloud_dir / (stem + ".bin");
        f.calib = calib_dir / (stem + ".txt");
        if (std::filesystem::exists(f.cloud) && std::filesystem::exists(f.calib)) {
            frames.push_back(std::move(f));
        } else if (unmatched) {
            unmatched->push_back(stem);
        }
    }
    return frames;
}

std::vector<StatsRow> reflectance_stats(std::span<const StatsFrame> frames, int bins) {
    if (bins < 1) throw FormatError("stats bins must be >= 1");
    constexpr std::array<ClassLabel, 4> kClasses = {ClassLabel::Car, ClassLabel::Pedestrian,
                                                    ClassLabel::Cyclist, ClassLabel::Other};
    std::array<std::vector<size_t>, 4> counts;
    for (auto& c : counts) c.assign(size_t(bins), 0);

    for (const StatsFrame& frame : frames) {
        const auto calib = read_calibration(frame.calib);
        const auto labels = read_labels(frame.labels, calib);
        const auto cloud = read_point_cloud(frame.cloud);
        std::vector<Vec3> positions;
        positions.reserve(cloud.size());
        for (const RawPoint& p : cloud) positions.push_back(p.position());

        for (const LabeledBox& lb : labels) {
            if (lb.dont_care) continue;
            const size_t cls = size_t(lb.label);
            for (size_t idx : points_in_box(positions, lb.box, 0.0)) {
                const double r = std::clamp(cloud[idx].r, 0.0, 1.0);
                const int bin = std::min(int(r * bins), bins - 1);
                counts[cls][size_t(bin)] += 1;
            }
        }
    }

    std::vector<StatsRow> rows;
    rows.reserve(kClasses.size() * size_t(bins));
    for (size_t cls = 0; cls < kClasses.size(); ++cls) {
        size_t total = 0;
        for (size_t c : counts[cls]) total += c;
        for (int b = 0; b < bins; ++b) {
            StatsRow row;
            row.label = kClasses[cls];
            row.bin_lo = double(b) / bins;
            row.bin_hi = double(b + 1) / bins;
            row.count = counts[cls][size_t(b)];
            row.fraction = total ? double(row.count) / double(total) : 0.0;
            rows.push_back(row);
        }
    }
    return rows;
}

void write_stats_csv(const std::filesystem::path& path, std::span<const StatsRow> rows) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw FormatError("cannot open " + path.string() + " for writing");
    out << "class,bin_lo,bin_hi,count,fraction\n";
    out << std::fixed << std::setprecision(6);
    for (const StatsRow& row : rows) {
        out << to_string(row.label) << "," << row.bin_lo << "," << row.bin_hi << "," << row.count
            << "," << row.fraction << "\n";
    }
}

std::vector<BenchRow> run_bench(const PipelineConfig& cfg, int repeat) {
    if (repeat < 3) throw FormatError("bench repeat must be >= 3");
    cfg.validate();

    const auto raw = read_point_cloud(cfg.cloud_path);
    const auto calib = read_calibration(cfg.calib_path);
    const auto raster = read_depth_raster(cfg.depth_path);
    const auto boxes = collect_boxes(cfg, calib);

    // One untimed pass prepares the map and weights.
    auto points = augment_points(raw, raster, calib);
    SparseVoxelMap map = voxelize(points, cfg.grid);
    if (!cfg.voxel_features_path.empty()) {
        map = load_voxel_features(map, cfg.voxel_features_path);
    }
    WeightBundle bundle;
    if (!cfg.weights_path.empty()) {
        bundle = WeightBundle::load(cfg.weights_path);
    } else {
        bundle = nn::seeded_init(cfg.seed, pipeline_manifest(cfg, int(map.channels())));
    }
    const bool adapt = int(map.channels()) != cfg.gfe.total_width();
    const std::array<BgrfStageWeights, 3> stages = {BgrfStageWeights::from_bundle(bundle, 1),
                                                    BgrfStageWeights::from_bundle(bundle, 2),
                                                    BgrfStageWeights::from_bundle(bundle, 3)};

    constexpr int kComponents = 7;
    const char* names[kComponents] = {"augment",    "voxelize",   "grid_pool", "pointgfe",
                                      "aware_pool", "downsample", "bgrf"};
    const int stage_counts[kComponents] = {1, 1, 1, 3, 3, 1, 3};
    std::array<std::vector<double>, kComponents> samples;

    std::vector<Vec3> positions;
    positions.reserve(points.size());
    for (const Point5& p : points) positions.push_back(p.position());

    for (int rep = 0; rep < repeat; ++rep) {
        auto t0 = Clock::now();
        const auto pts = augment_points(raw, raster, calib);
        samples[0].push_back(ms_since(t0));

        t0 = Clock::now();
        const SparseVoxelMap vmap = voxelize(pts, cfg.grid);
        samples[1].push_back(ms_since(t0));

        t0 = Clock::now();
        const GridHashIndex vidx(map.centers(), cfg.pool.grid_query_radius);
        std::vector<FeatureVolume> grid_vols;
        grid_vols.reserve(boxes.size());
        for (const Box3D& box : boxes) grid_vols.push_back(roi_grid_pool(map, vidx, box, cfg.pool));
        samples[2].push_back(ms_since(t0));

        // The point path runs once per cascade stage in the reference
        // accounting, so its components are timed over three executions.
        std::vector<std::vector<Vec3>> canon(boxes.size());
        std::vector<Tensor> embeddings(boxes.size());
        t0 = Clock::now();
        for (int exec = 0; exec < 3; ++exec) {
            for (size_t b = 0; b < boxes.size(); ++b) {
                const auto inside = points_in_box(positions, boxes[b], cfg.pool.margin);
                std::vector<Point5> cropped;
                std::vector<Vec3> local;
                cropped.reserve(inside.size());
                local.reserve(inside.size());
                for (size_t idx : inside) {
                    const Vec3 lp = canonicalize_point(positions[idx], boxes[b]);
                    local.push_back(lp);
                    cropped.push_back({lp.x(), lp.y(), lp.z(), points[idx].r, points[idx].d_da});
                }
                embeddings[b] = pointgfe_stack(cropped, cfg.gfe, bundle);
                canon[b] = std::move(local);
            }
        }
        samples[3].push_back(ms_since(t0));

        std::vector<FeatureVolume> pooled(boxes.size());
        t0 = Clock::now();
        for (int exec = 0; exec < 3; ++exec) {
            for (size_t b = 0; b < boxes.size(); ++b) {
                pooled[b] = roi_aware_pool(canon[b], embeddings[b], boxes[b].dims(), cfg.pool.m);
            }
        }
        samples[4].push_back(ms_since(t0));

        std::vector<FeatureVolume> down(boxes.size());
        t0 = Clock::now();
        for (size_t b = 0; b < boxes.size(); ++b) {
            down[b] = downsample_volume(pooled[b], bundle.at("down.K"), bundle.at("down.b"));
        }
        samples[5].push_back(ms_since(t0));

        t0 = Clock::now();
        for (size_t b = 0; b < boxes.size(); ++b) {
            const FeatureVolume fused_input =
                adapt ? adapt_channels(grid_vols[b], bundle.at("bgrf.adapt_v.W"),
                                       bundle.at("bgrf.adapt_v.b"))
                      : grid_vols[b];
            cascade(fused_input, down[b], stages, cfg.gate_mode);
        }
        samples[6].push_back(ms_since(t0));

        (void)vmap;
    }

    std::vector<BenchRow> rows;
    rows.reserve(kComponents);
    for (int c = 0; c < kComponents; ++c) {
        rows.push_back({names[c], stage_counts[c], median_of(samples[size_t(c)])});
    }
    return rows;
}

void write_bench_csv(const std::filesystem::path& path, std::span<const BenchRow> rows) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw FormatError("cannot open " + path.string() + " for writing");
    out << "component,stages,median_ms\n";
    out << std::fixed << std::setprecision(3);
    for (const BenchRow& row : rows) {
        out << row.component << "," << row.stages << "," << row.median_ms << "\n";
    }
}

}  // namespace roikit
