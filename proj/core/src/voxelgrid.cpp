#include "roikit/voxelgrid.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <unordered_map>

namespace roikit {
namespace {

// 21 bits per axis; extents are validated against this bound.
constexpr int64_t kAxisBits = 21;
constexpr int64_t kAxisMax = int64_t(1) << kAxisBits;

int64_t pack_key(const Vec3i& v) {
    return (int64_t(v.x()) << (2 * kAxisBits)) | (int64_t(v.y()) << kAxisBits) | int64_t(v.z());
}

// Kahan-compensated accumulator; keeps per-voxel means stable under
// input reordering.
struct KahanSum {
    double sum = 0.0;
    double c = 0.0;
    void add(double v) {
        const double y = v - c;
        const double t = sum + y;
        c = (t - sum) - y;
        sum = t;
    }
};

}  // namespace

GridSpec GridSpec::kitti_default() {
    GridSpec spec;
    spec.origin = Vec3(0.0, -40.0, -3.0);
    spec.voxel_size = Vec3(0.05, 0.05, 0.1);
    spec.extent = Vec3i(1408, 1600, 40);
    return spec;
}

void GridSpec::validate() const {
    for (int a = 0; a < 3; ++a) {
        if (!(voxel_size[a] > 0.0)) throw FormatError("voxel_size must be positive");
        if (extent[a] < 1) throw FormatError("grid extent must be >= 1 per axis");
        if (extent[a] >= kAxisMax) throw FormatError("grid extent exceeds supported range");
    }
}

std::optional<Vec3i> GridSpec::voxel_of(const Vec3& p) const {
    Vec3i idx;
    for (int a = 0; a < 3; ++a) {
        const double f = std::floor((p[a] - origin[a]) / voxel_size[a]);
        if (f < 0.0 || f >= double(extent[a])) return std::nullopt;
        idx[a] = int(f);
    }
    return idx;
}

Vec3 GridSpec::center_of(const Vec3i& index) const {
    return origin + (index.cast<double>() + Vec3::Constant(0.5)).cwiseProduct(voxel_size);
}

SparseVoxelMap::SparseVoxelMap(GridSpec spec, std::vector<VoxelEntry> entries,
                               size_t dropped_points, size_t channel_hint)
    : spec_(std::move(spec)), entries_(std::move(entries)), dropped_(dropped_points) {
    std::sort(entries_.begin(), entries_.end(), [](const VoxelEntry& a, const VoxelEntry& b) {
        return pack_key(a.index) < pack_key(b.index);
    });
    keys_.reserve(entries_.size());
    for (const VoxelEntry& e : entries_) keys_.push_back(pack_key(e.index));
    channels_ = entries_.empty() ? channel_hint : entries_.front().feature.size();
    for (const VoxelEntry& e : entries_) {
        if (e.feature.size() != channels_) {
            throw FormatError("voxel entries have inconsistent channel counts");
        }
    }
}

const VoxelEntry* SparseVoxelMap::find(const Vec3i& index) const {
    const int64_t key = pack_key(index);
    const auto it = std::lower_bound(keys_.begin(), keys_.end(), key);
    if (it == keys_.end() || *it != key) return nullptr;
    return &entries_[size_t(it - keys_.begin())];
}

std::vector<Vec3> SparseVoxelMap::centers() const {
    std::vector<Vec3> out;
    out.reserve(entries_.size());
    for (const VoxelEntry& e : entries_) out.push_back(e.center);
    return out;
}

SparseVoxelMap voxelize(std::span<const Point5> points, const GridSpec& spec) {
    spec.validate();

    struct Accum {
        Vec3i index;
        KahanSum sums[5];
        size_t count = 0;
    };
    std::unordered_map<int64_t, Accum> accum;
    size_t dropped = 0;

    for (const Point5& p : points) {
        const auto idx = spec.voxel_of(p.position());
        if (!idx) {
            ++dropped;
            continue;
        }
        Accum& a = accum[pack_key(*idx)];
        a.index = *idx;
        a.sums[0].add(p.x);
        a.sums[1].add(p.y);
        a.sums[2].add(p.z);
        a.sums[3].add(p.r);
        a.sums[4].add(p.d_da);
        a.count += 1;
    }

    std::vector<VoxelEntry> entries;
    entries.reserve(accum.size());
    for (auto& [key, a] : accum) {
        VoxelEntry e;
        e.index = a.index;
        e.center = spec.center_of(a.index);
        e.feature.resize(5);
        for (int c = 0; c < 5; ++c) e.feature[size_t(c)] = a.sums[c].sum / double(a.count);
        e.member_count = a.count;
        entries.push_back(std::move(e));
    }
    return SparseVoxelMap(spec, std::move(entries), dropped, 5);
}

SparseVoxelMap load_voxel_features(const SparseVoxelMap& map, const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw FormatError("cannot open " + path.string());

    struct Record {
        Vec3i index;
        std::vector<double> feature;
    };
    std::vector<Record> records;
    size_t channels = 0;
    std::string line;
    size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        std::istringstream iss(line);
        std::vector<std::string> tokens;
        std::string tok;
        while (iss >> tok) tokens.push_back(tok);
        if (tokens.empty()) continue;
        if (tokens.size() < 4) {
            throw FormatError(path.string() + ":" + std::to_string(line_no) +
                              ": expected ix iy iz f_1 ... f_C");
        }
        Record rec;
        for (int a = 0; a < 3; ++a) {
            int v = 0;
            const auto& t = tokens[size_t(a)];
            auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
            if (ec != std::errc() || ptr != t.data() + t.size()) {
                throw FormatError(path.string() + ":" + std::to_string(line_no) +
                                  ": bad coordinate '" + t + "'");
            }
            if (v < 0 || v >= map.spec().extent[a]) {
                throw FormatError(path.string() + ":" + std::to_string(line_no) +
                                  ": coordinate outside grid extent");
            }
            rec.index[a] = v;
        }
        for (size_t i = 3; i < tokens.size(); ++i) {
            double v = 0.0;
            const auto& t = tokens[i];
            auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
            if (ec != std::errc() || ptr != t.data() + t.size()) {
                throw FormatError(path.string() + ":" + std::to_string(line_no) +
                                  ": bad feature value '" + t + "'");
            }
            rec.feature.push_back(v);
        }
        if (channels == 0) {
            channels = rec.feature.size();
        } else if (rec.feature.size() != channels) {
            throw FormatError(path.string() + ":" + std::to_string(line_no) +
                              ": mixed channel counts (" + std::to_string(rec.feature.size()) +
                              " vs " + std::to_string(channels) + ")");
        }
        records.push_back(std::move(rec));
    }

    if (records.empty()) return map;  // nothing to change

    std::unordered_map<int64_t, size_t> replacement;
    for (size_t i = 0; i < records.size(); ++i) replacement[pack_key(records[i].index)] = i;

    std::vector<VoxelEntry> entries;
    entries.reserve(map.size() + records.size());
    for (const VoxelEntry& e : map.entries()) {
        const auto it = replacement.find(pack_key(e.index));
        if (it == replacement.end()) {
            if (channels != map.channels()) {
                throw FormatError(path.string() + ": channel count " + std::to_string(channels) +
                                  " differs from the map's " + std::to_string(map.channels()) +
                                  " but entry (" + std::to_string(e.index.x()) + "," +
                                  std::to_string(e.index.y()) + "," + std::to_string(e.index.z()) +
                                  ") is not covered");
            }
            entries.push_back(e);
            continue;
        }
        VoxelEntry r = e;
        r.feature = records[it->second].feature;
        entries.push_back(std::move(r));
        replacement.erase(it);
    }
    for (const auto& [key, i] : replacement) {  // new voxels
        VoxelEntry e;
        e.index = records[i].index;
        e.center = map.spec().center_of(e.index);
        e.feature = records[i].feature;
        e.member_count = 0;
        entries.push_back(std::move(e));
    }
    return SparseVoxelMap(map.spec(), std::move(entries), map.dropped_points(), channels);
}

}  // namespace roikit
