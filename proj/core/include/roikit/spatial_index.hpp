#pragma once

#include <cstdint>
#include <span>
#include <unordered_map>
#include <vector>

#include "roikit/types.hpp"

namespace roikit {

// Grid-hash acceleration structure for fixed-radius neighbor search.
// Points live in buckets keyed by floor(position / cell_size); with
// cell_size equal to the query radius a query touches at most a 3x3x3
// cell neighborhood. The index is immutable after construction and
// supports concurrent queries.
class GridHashIndex {
public:
    GridHashIndex() = default;

    // cell_size > 0. Construction is O(N) expected.
    GridHashIndex(std::span<const Vec3> positions, double cell_size);

    // Exactly k indices of points with Euclidean distance <= radius
    // from center (boundary inclusive), selected as the first k in
    // ascending point-index order. If fewer than k qualify, every slot
    // is pre-filled with the first found index. Zero matches return an
    // empty vector (the Empty marker; not an error).
    std::vector<int32_t> ball_query(const Vec3& center, double radius, int k) const;

    // The in-radius indices in ascending order, truncated to max_count
    // and without padding. ball_query is this plus the padding rule.
    std::vector<int32_t> radius_neighbors(const Vec3& center, double radius,
                                          size_t max_count) const;

    size_t size() const { return positions_.size(); }
    double cell_size() const { return cell_size_; }
    const std::vector<Vec3>& positions() const { return positions_; }

private:
    struct CellKey {
        int64_t x = 0, y = 0, z = 0;
        bool operator==(const CellKey&) const = default;
    };
    struct CellHash {
        size_t operator()(const CellKey& c) const {
            return size_t(c.x * 73856093LL) ^ size_t(c.y * 19349663LL) ^
                   size_t(c.z * 83492791LL);
        }
    };

    CellKey cell_of(const Vec3& p) const;

    double cell_size_ = 1.0;
    std::vector<Vec3> positions_;
    std::unordered_map<CellKey, std::vector<int32_t>, CellHash> buckets_;
};

inline GridHashIndex build_index(std::span<const Vec3> positions, double cell_size) {
    return GridHashIndex(positions, cell_size);
}

// Linear-scan reference with the same selection and padding contract as
// GridHashIndex::ball_query; the two must agree index-for-index.
std::vector<int32_t> ball_query_bruteforce(std::span<const Vec3> positions, const Vec3& center,
                                           double radius, int k);

}  // namespace roikit
