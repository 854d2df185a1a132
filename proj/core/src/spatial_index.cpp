#include "roikit/spatial_index.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace roikit {

GridHashIndex::GridHashIndex(std::span<const Vec3> positions, double cell_size)
    : cell_size_(cell_size), positions_(positions.begin(), positions.end()) {
    if (!(cell_size > 0.0)) throw std::invalid_argument("cell_size must be positive");
    for (size_t i = 0; i < positions_.size(); ++i) {
        buckets_[cell_of(positions_[i])].push_back(int32_t(i));
    }
}

GridHashIndex::CellKey GridHashIndex::cell_of(const Vec3& p) const {
    return {int64_t(std::floor(p.x() / cell_size_)), int64_t(std::floor(p.y() / cell_size_)),
            int64_t(std::floor(p.z() / cell_size_))};
}

std::vector<int32_t> GridHashIndex::radius_neighbors(const Vec3& center, double radius,
                                                     size_t max_count) const {
    const double r2 = radius * radius;
    const CellKey lo = cell_of(center - Vec3::Constant(radius));
    const CellKey hi = cell_of(center + Vec3::Constant(radius));

    std::vector<int32_t> found;
    for (int64_t cx = lo.x; cx <= hi.x; ++cx) {
        for (int64_t cy = lo.y; cy <= hi.y; ++cy) {
            for (int64_t cz = lo.z; cz <= hi.z; ++cz) {
                const auto it = buckets_.find(CellKey{cx, cy, cz});
                if (it == buckets_.end()) continue;
                for (int32_t idx : it->second) {
                    if ((positions_[size_t(idx)] - center).squaredNorm() <= r2) {
                        found.push_back(idx);
                    }
                }
            }
        }
    }
    std::sort(found.begin(), found.end());
    if (found.size() > max_count) found.resize(max_count);
    return found;
}

std::vector<int32_t> GridHashIndex::ball_query(const Vec3& center, double radius, int k) const {
    if (k < 1) throw std::invalid_argument("k must be >= 1");
    const std::vector<int32_t> found = radius_neighbors(center, radius, size_t(k));
    if (found.empty()) return {};
    std::vector<int32_t> out(size_t(k), found[0]);
    std::copy(found.begin(), found.end(), out.begin());
    return out;
}

std::vector<int32_t> ball_query_bruteforce(std::span<const Vec3> positions, const Vec3& center,
                                           double radius, int k) {
    if (k < 1) throw std::invalid_argument("k must be >= 1");
    const double r2 = radius * radius;
    std::vector<int32_t> out;
    size_t found = 0;
    for (size_t i = 0; i < positions.size() && found < size_t(k); ++i) {
        if ((positions[i] - center).squaredNorm() <= r2) {
            if (found == 0) out.assign(size_t(k), int32_t(i));
            out[found] = int32_t(i);
            ++found;
        }
    }
    return out;
}

}  // namespace roikit
