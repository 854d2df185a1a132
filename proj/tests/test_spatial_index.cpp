#include <doctest.h>

#include "roikit/spatial_index.hpp"
#include "test_support.hpp"

using namespace roikit;

TEST_CASE("empty index answers every query with the Empty marker") {
    const GridHashIndex index(std::vector<Vec3>{}, 0.8);
    CHECK(index.size() == 0);
    CHECK(index.ball_query(Vec3(0, 0, 0), 0.8, 9).empty());
}

TEST_CASE("single point at the origin is its own neighborhood") {
    const GridHashIndex index(std::vector<Vec3>{Vec3(0, 0, 0)}, 0.8);
    const auto result = index.ball_query(Vec3(0, 0, 0), 0.8, 4);
    CHECK(result == std::vector<int32_t>{0, 0, 0, 0});
}

TEST_CASE("every indexed point is findable from its own position") {
    testsup::Rng rng(41);
    std::vector<Vec3> pts;
    for (int i = 0; i < 1000; ++i) pts.push_back(rng.point(-10.0, 10.0));
    const GridHashIndex index(pts, 0.5);
    for (size_t i = 0; i < pts.size(); ++i) {
        const auto found = index.radius_neighbors(pts[i], 1e-9, 4);
        REQUIRE(!found.empty());
        bool has_self = false;
        for (int32_t idx : found) has_self |= (size_t(idx) == i);
        CHECK(has_self);
    }
}

TEST_CASE("in-radius points at 0.5 and 0.79 are both returned at radius 0.8") {
    const std::vector<Vec3> pts = {Vec3(0.5, 0, 0), Vec3(0.79, 0, 0), Vec3(0.85, 0, 0)};
    const GridHashIndex index(pts, 0.8);
    const auto result = index.ball_query(Vec3(0, 0, 0), 0.8, 2);
    CHECK(result == std::vector<int32_t>{0, 1});
}

TEST_CASE("padding repeats the first found index") {
    const std::vector<Vec3> pts = {Vec3(5, 5, 5), Vec3(0.1, 0, 0)};
    const GridHashIndex index(pts, 0.8);
    const auto result = index.ball_query(Vec3(0, 0, 0), 0.8, 9);
    REQUIRE(result.size() == 9);
    CHECK(result[0] == 1);
    for (int32_t idx : result) CHECK(idx == 1);
}

TEST_CASE("brute force: single point and empty results") {
    const std::vector<Vec3> one = {Vec3(1, 1, 1)};
    CHECK(ball_query_bruteforce(one, Vec3(1, 1, 1), 0.5, 3) == std::vector<int32_t>{0, 0, 0});
    CHECK(ball_query_bruteforce(one, Vec3(9, 9, 9), 0.5, 3).empty());
}

TEST_CASE("grid index and brute force agree index-for-index on random scenes") {
    testsup::Rng rng(43);
    for (int scene = 0; scene < 10; ++scene) {
        std::vector<Vec3> pts;
        const int n = 100 + testsup::Rng(scene).uniform_int(0, 400);
        for (int i = 0; i < n; ++i) pts.push_back(rng.point(-4.0, 4.0));
        const GridHashIndex index(pts, 0.8);
        for (int q = 0; q < 50; ++q) {
            const Vec3 center = rng.point(-4.0, 4.0);
            CHECK(index.ball_query(center, 0.8, 9) == ball_query_bruteforce(pts, center, 0.8, 9));
        }
    }
}

TEST_CASE("agreement holds when the radius spans several cells") {
    testsup::Rng rng(47);
    std::vector<Vec3> pts;
    for (int i = 0; i < 300; ++i) pts.push_back(rng.point(-3.0, 3.0));
    const GridHashIndex index(pts, 0.25);  // radius 4x the cell size
    for (int q = 0; q < 40; ++q) {
        const Vec3 center = rng.point(-3.0, 3.0);
        CHECK(index.ball_query(center, 1.0, 5) == ball_query_bruteforce(pts, center, 1.0, 5));
    }
}

TEST_CASE("every returned neighbor is within radius") {
    testsup::Rng rng(53);
    std::vector<Vec3> pts;
    for (int i = 0; i < 400; ++i) pts.push_back(rng.point(-2.0, 2.0));
    const GridHashIndex index(pts, 0.8);
    for (int q = 0; q < 60; ++q) {
        const Vec3 center = rng.point(-2.0, 2.0);
        for (int32_t idx : index.ball_query(center, 0.8, 9)) {
            CHECK((pts[size_t(idx)] - center).norm() <= 0.8 + 1e-9);
        }
    }
}

TEST_CASE("translation invariance of the returned indices") {
    testsup::Rng rng(59);
    std::vector<Vec3> pts;
    for (int i = 0; i < 300; ++i) pts.push_back(rng.point(-2.0, 2.0));
    const Vec3 shift(13.7, -2.9, 8.1);
    std::vector<Vec3> shifted;
    shifted.reserve(pts.size());
    for (const Vec3& p : pts) shifted.push_back(p + shift);

    const GridHashIndex index(pts, 0.8);
    const GridHashIndex shifted_index(shifted, 0.8);
    for (int q = 0; q < 50; ++q) {
        const Vec3 center = rng.point(-2.0, 2.0);
        CHECK(index.ball_query(center, 0.8, 9) ==
              shifted_index.ball_query(center + shift, 0.8, 9));
    }
}
