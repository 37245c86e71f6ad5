#include "collar/camera.hpp"
#include "collar/cloud_ops.hpp"
#include "collar/eigen_sym3.hpp"
#include "collar/error.hpp"
#include "collar/kdtree.hpp"

#include "oracles.hpp"
#include "test_support.hpp"

#include <doctest.h>

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <fstream>
#include <numeric>
#include <set>

using namespace collar;

namespace {

std::vector<std::size_t> brute_knn(const std::vector<Vec3>& pts, const Vec3& q, std::size_t k) {
    std::vector<std::size_t> idx(pts.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
        return (pts[a] - q).squaredNorm() < (pts[b] - q).squaredNorm();
    });
    idx.resize(std::min(k, idx.size()));
    return idx;
}

std::vector<Vec3> random_points(std::size_t n, double lo = -1.0, double hi = 1.0) {
    std::vector<Vec3> out(n);
    for (Vec3& p : out) p = test::random_vec(lo, hi);
    return out;
}

Mat3 random_psd() {
    const Mat3 q = test::random_rotation();
    const Vec3 d(test::uniform(0, 1), test::uniform(0, 1), test::uniform(0, 1));
    return q * d.asDiagonal() * q.transpose();
}

}  // namespace

TEST_CASE("covariance and sigma examples") {
    SUBCASE("planar points have zero sigma and a z normal") {
        std::vector<Vec3> plane;
        for (int i = 0; i < 5; ++i)
            for (int j = 0; j < 5; ++j) plane.emplace_back(i * 0.01, j * 0.01, 0.5);
        const auto s = test::checked_stats(plane);
        CHECK(s.sigma < 1e-9);
        CHECK(std::abs(std::abs(s.normal().z()) - 1.0) < 1e-9);
    }
    SUBCASE("unit cube corners give sigma of one third") {
        std::vector<Vec3> cube;
        for (int i = 0; i < 8; ++i) cube.emplace_back(i & 1, (i >> 1) & 1, (i >> 2) & 1);
        const auto s = test::checked_stats(cube);
        CHECK(std::abs(s.sigma - 1.0 / 3.0) < 1e-12);
        CHECK((s.covariance - 0.25 * Mat3::Identity()).norm() < 1e-15);
    }
    SUBCASE("collinear points have zero sigma and major axis along the line") {
        std::vector<Vec3> line;
        for (int i = 0; i < 10; ++i) line.emplace_back(i * 0.1, 0.0, 1.0);
        const auto s = test::checked_stats(line);
        CHECK(s.sigma < 1e-12);
        CHECK(std::abs(s.major_axis().x()) == doctest::Approx(1.0));
    }
    SUBCASE("errors") {
        const std::vector<Vec3> same(4, Vec3(0.1, 0.2, 0.3));
        try {
            local_surface_stats(same);
            FAIL("expected degenerate");
        } catch (const Error& e) {
            CHECK(e.code() == ErrorCode::DegenerateGeometry);
        }
        try {
            local_surface_stats(std::span<const Vec3>{});
            FAIL("expected insufficient");
        } catch (const Error& e) {
            CHECK(e.code() == ErrorCode::InsufficientPoints);
        }
    }
}

TEST_CASE("covariance matches the naive formula") {
    for (int i = 0; i < 200; ++i) {
        const auto pts = random_points(test::uniform_int(1, 200), -0.3, 0.3);
        Vec3 mean;
        const Mat3 c = covariance(pts, &mean);
        CHECK((c - test::naive_covariance(pts)).cwiseAbs().maxCoeff() < 1e-12);
        CHECK((c - c.transpose()).norm() == 0.0);
    }
}

TEST_CASE("sigma bounds and invariances") {
    for (int i = 0; i < 100; ++i) {
        auto pts = random_points(test::uniform_int(3, 80));
        // Squash some clouds toward a plane.
        if (i % 3 == 0)
            for (Vec3& p : pts) p.z() *= 1e-3;
        const auto s = test::checked_stats(pts);

        const Mat3 r = test::random_rotation();
        const Vec3 t = test::random_vec(-2, 2);
        const double scale = test::uniform(0.1, 10.0);
        std::vector<Vec3> moved;
        for (const Vec3& p : pts) moved.push_back(scale * (r * p) + t);
        CHECK(std::abs(local_surface_stats(moved).sigma - s.sigma) < 1e-9);

        std::vector<Vec3> reversed(pts.rbegin(), pts.rend());
        CHECK(std::abs(local_surface_stats(reversed).sigma - s.sigma) < 1e-12);
    }
}

TEST_CASE("Jacobi eigensolver") {
    SUBCASE("diagonal input") {
        const auto e = eigen_symmetric(Vec3(3, 1, 2).asDiagonal());
        CHECK(e.values == Vec3(1, 2, 3));
        CHECK(e.vectors.col(0) == Vec3(0, 1, 0));
        CHECK(e.vectors.col(2) == Vec3(1, 0, 0));
    }
    SUBCASE("random PSD matrices against the reference solver") {
        for (int i = 0; i < 2000; ++i) {
            const Mat3 m = random_psd();
            const auto e = eigen_symmetric(m);
            CHECK((m * e.vectors - e.vectors * e.values.asDiagonal()).norm() < 1e-8);
            CHECK((e.vectors.transpose() * e.vectors - Mat3::Identity()).norm() < 1e-8);
            CHECK(e.values[0] <= e.values[1]);
            CHECK(e.values[1] <= e.values[2]);
            Eigen::SelfAdjointEigenSolver<Mat3> ref(m);
            CHECK((e.values - ref.eigenvalues()).norm() < 1e-10);
            for (int k = 0; k < 3; ++k) {
                const Vec3 v = e.vectors.col(k);
                Eigen::Index arg;
                v.cwiseAbs().maxCoeff(&arg);
                CHECK(v[arg] > 0.0);
            }
        }
    }
    SUBCASE("repeated eigenvalues stay orthonormal") {
        const Mat3 r = test::random_rotation();
        const Mat3 m = r * Vec3(0.5, 0.5, 2.0).asDiagonal() * r.transpose();
        const auto e = eigen_symmetric(m);
        CHECK((m * e.vectors - e.vectors * e.values.asDiagonal()).norm() < 1e-10);
        CHECK((e.vectors.transpose() * e.vectors - Mat3::Identity()).norm() < 1e-10);
        CHECK(eigen_symmetric(Mat3::Zero()).values == Vec3::Zero());
    }
}

TEST_CASE("KdTree matches brute force") {
    for (int trial = 0; trial < 20; ++trial) {
        auto pts = random_points(test::uniform_int(1, 600));
        // Duplicates and grid-aligned points exercise the tie rule.
        if (trial % 4 == 0) {
            for (Vec3& p : pts) p = (p * 4).array().round() / 4;
        }
        const KdTree tree(pts);
        for (int q = 0; q < 30; ++q) {
            const Vec3 query = test::random_vec(-1.2, 1.2);
            const std::size_t k = test::uniform_int(1, 60);
            CHECK(tree.knn(query, k) == brute_knn(pts, query, k));

            const double radius = test::uniform(0.0, 0.6);
            std::vector<std::size_t> expected;
            for (std::size_t i = 0; i < pts.size(); ++i)
                if ((pts[i] - query).norm() <= radius) expected.push_back(i);
            CHECK(tree.radius_search(query, radius) == expected);
            CHECK(tree.count_within(query, radius, pts.size() + 1) == expected.size());
            CHECK(tree.count_within(query, radius, 3) == std::min<std::size_t>(3, expected.size()));
        }
    }
}

TEST_CASE("knn examples") {
    PointCloud line;
    for (int i = 0; i < 5; ++i) line.points.emplace_back(i, 0, 0);
    CHECK(knn(line, Vec3(0.1, 0, 0), 2) == std::vector<std::size_t>{0, 1});
    CHECK(knn(line, Vec3(2.5, 0, 0), 2) == std::vector<std::size_t>{2, 3});
    CHECK(knn(line, Vec3(0, 0, 0), 10).size() == 5);
    CHECK_THROWS_AS(knn(PointCloud{}, Vec3::Zero(), 3), Error);
}

TEST_CASE("mask_to_cloud") {
    const CameraIntrinsics intr{500, 500, 2, 2};
    DepthImage depth(5, 5);
    BinaryMask mask(5, 5);
    depth.at(2, 2) = 1000;
    depth.at(1, 3) = 500;
    depth.at(4, 4) = 700;  // not masked
    mask.set(2, 2);
    mask.set(1, 3);
    mask.set(0, 0);  // masked hole
    const PointCloud cloud = mask_to_cloud(depth, mask, intr);
    REQUIRE(cloud.size() == 2);
    CHECK(cloud.frame == Frame::Camera);
    CHECK((cloud.points[0] - deproject_pixel(3, 1, 500, intr)).norm() < 1e-15);
    CHECK((cloud.points[1] - Vec3(0, 0, 1)).norm() < 1e-15);

    try {
        mask_to_cloud(depth, BinaryMask(5, 5), intr);
        FAIL("expected empty");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::EmptyCloud);
    }
    try {
        mask_to_cloud(depth, BinaryMask(4, 5), intr);
        FAIL("expected mismatch");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::DimensionMismatch);
    }
}

TEST_CASE("voxel_downsample") {
    PointCloud c;
    c.points = {{0.001, 0.001, 0.001}, {0.003, 0.001, 0.001}, {0.006, 0.0, 0.0}, {-0.001, 0.0, 0.0}};
    const PointCloud d = voxel_downsample(c, 0.005);
    REQUIRE(d.size() == 3);
    CHECK((d.points[0] - Vec3(0.002, 0.001, 0.001)).norm() < 1e-15);
    CHECK((d.points[1] - Vec3(0.006, 0, 0)).norm() < 1e-15);
    CHECK((d.points[2] - Vec3(-0.001, 0, 0)).norm() < 1e-15);

    for (int i = 0; i < 10; ++i) {
        PointCloud r;
        r.points = random_points(500, 0.0, 0.05);
        const double voxel = test::uniform(0.002, 0.02);
        const PointCloud out = voxel_downsample(r, voxel);
        CHECK(out.size() <= r.size());
        // One output point per occupied cell, each inside its cell.
        std::set<std::array<long long, 3>> cells;
        for (const Vec3& p : r.points)
            cells.insert({(long long)std::floor(p.x() / voxel), (long long)std::floor(p.y() / voxel),
                          (long long)std::floor(p.z() / voxel)});
        CHECK(out.size() == cells.size());
        CHECK(voxel_downsample(r, 1e-9).size() == r.size());
    }
    CHECK_THROWS_AS(voxel_downsample(c, 0.0), Error);
}

TEST_CASE("radius_outlier_removal") {
    PointCloud c;
    for (int i = 0; i < 6; ++i) c.points.emplace_back(0.001 * i, 0, 0);
    c.points.emplace_back(1, 1, 1);
    const PointCloud kept = radius_outlier_removal(c, 0.010, 5);
    CHECK(kept.size() == 6);
    CHECK(radius_outlier_removal(c, 0.010, 6).size() == 0);
    CHECK(radius_outlier_removal(c, 0.010, 1).size() == 6);
    CHECK_THROWS_AS(radius_outlier_removal(c, 0.010, 0), Error);

    for (int i = 0; i < 5; ++i) {
        PointCloud r;
        r.points = random_points(300, 0, 0.1);
        const double radius = test::uniform(0.005, 0.03);
        const int min = test::uniform_int(1, 8);
        const PointCloud out = radius_outlier_removal(r, radius, min);
        std::vector<Vec3> expected;
        for (const Vec3& p : r.points) {
            int n = 0;
            for (const Vec3& q : r.points) n += (p - q).norm() <= radius;
            if (n - 1 >= min) expected.push_back(p);
        }
        CHECK(out.points == expected);
    }
}

TEST_CASE("resolve_center_pixel hole fallback") {
    DepthImage depth(11, 11);
    BinaryMask mask(11, 11);
    for (int r = 0; r < 11; ++r)
        for (int c = 0; c < 11; ++c) {
            depth.at(r, c) = 800;
            mask.set(r, c);
        }
    CHECK(resolve_center_pixel({5, 5}, depth, mask, 5) == Pixel{5, 5});
    depth.at(5, 5) = 0;
    CHECK(resolve_center_pixel({5, 5}, depth, mask, 5) == Pixel{4, 5});
    mask.set(4, 5, false);
    CHECK(resolve_center_pixel({5, 5}, depth, mask, 5) == Pixel{5, 4});

    DepthImage holes(11, 11);
    holes.at(0, 0) = 900;
    try {
        resolve_center_pixel({10, 10}, holes, mask, 5);
        FAIL("expected no-detection");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::NoDetection);
    }
}

TEST_CASE("select_grasp_point picks the maximal-sigma candidate") {
    const CameraIntrinsics intr{100, 100, 20, 20};
    DepthImage depth(41, 41);
    BinaryMask mask(41, 41);
    // Flat plane at 0.5 m with a fold along column 25.
    for (int r = 0; r < 41; ++r)
        for (int c = 0; c < 41; ++c) {
            const double z = 0.5 - 0.02 * std::exp(-std::pow((c - 25) / 2.0, 2));
            depth.at(r, c) = static_cast<std::uint16_t>(std::lround(z * 1000));
            mask.set(r, c);
        }
    const PointCloud cloud = mask_to_cloud(depth, mask, intr);
    SelectionParams params;
    params.big_n = 200;
    params.small_n = 30;
    const GraspSelection g = select_grasp_point(cloud, {20, 20}, depth, mask, intr, params);
    CHECK(g.candidates.size() == 200);
    CHECK(g.candidate_sigma.size() == 200);
    const auto best = std::max_element(g.candidate_sigma.begin(), g.candidate_sigma.end());
    CHECK(g.grasp_index == g.candidates[best - g.candidate_sigma.begin()]);
    CHECK(g.grasp_point == cloud.points[g.grasp_index]);
    CHECK(g.grasp_region.size() == 30);
    for (double s : g.candidate_sigma) test::check_sigma_bounds(s);
    // The winner sits on the fold, not the flat part.
    const ProjectedPixel px = project_point(g.grasp_point, intr);
    CHECK(std::abs(px.u - 25.0) <= 4.0);

    // Oracle: recompute each candidate's sigma by brute force.
    for (std::size_t i = 0; i < g.candidates.size(); i += 17) {
        const auto nn = brute_knn(cloud.points, cloud.points[g.candidates[i]], 30);
        std::vector<Vec3> nb;
        for (auto j : nn) nb.push_back(cloud.points[j]);
        CHECK(std::abs(local_surface_stats(nb).sigma - g.candidate_sigma[i]) < 1e-12);
    }
}

TEST_CASE("write_ply") {
    PointCloud c;
    c.points = {{0, 0, 1}, {0.5, -0.25, 2}};
    const auto dir = test::scratch_dir("ply");
    write_ply(dir / "c.ply", c);
    std::ifstream in(dir / "c.ply");
    std::string all((std::istreambuf_iterator<char>(in)), {});
    CHECK(all.rfind("ply\n", 0) == 0);
    CHECK(all.find("element vertex 2") != std::string::npos);
    CHECK(all.find("end_header") != std::string::npos);
    std::filesystem::remove_all(dir);
}
