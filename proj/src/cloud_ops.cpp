#include "collar/cloud_ops.hpp"

#include "collar/camera.hpp"
#include "collar/eigen_sym3.hpp"
#include "collar/error.hpp"
#include "collar/kdtree.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <optional>
#include <unordered_map>

namespace collar {
namespace {

struct VoxelKey {
    std::int64_t x, y, z;
    bool operator==(const VoxelKey&) const = default;
};

struct VoxelKeyHash {
    std::size_t operator()(const VoxelKey& k) const noexcept {
        std::size_t h = static_cast<std::size_t>(k.x) * 73856093u;
        h ^= static_cast<std::size_t>(k.y) * 19349663u;
        h ^= static_cast<std::size_t>(k.z) * 83492791u;
        return h;
    }
};

std::vector<Vec3> gather(const PointCloud& cloud, const std::vector<std::size_t>& idx) {
    std::vector<Vec3> out;
    out.reserve(idx.size());
    for (std::size_t i : idx) out.push_back(cloud.points[i]);
    return out;
}

}  // namespace

Mat3 covariance(std::span<const Vec3> points, Vec3* centroid) {
    if (points.empty()) throw Error(ErrorCode::InsufficientPoints, "covariance of an empty set");
    const double n = static_cast<double>(points.size());
    Vec3 mean = Vec3::Zero();
    for (const Vec3& p : points) mean += p;
    mean /= n;
    Mat3 cov = Mat3::Zero();
    for (const Vec3& p : points) {
        const Vec3 d = p - mean;
        cov += d * d.transpose();
    }
    cov /= n;
    if (centroid) *centroid = mean;
    return cov;
}

LocalSurfaceStats local_surface_stats(std::span<const Vec3> points) {
    LocalSurfaceStats s;
    s.covariance = covariance(points, &s.centroid);
    const SymmetricEigen3 eig = eigen_symmetric(s.covariance);
    s.eigenvalues = eig.values.cwiseMax(0.0);
    s.eigenvectors = eig.vectors;
    const double trace = s.eigenvalues.sum();
    if (!(trace > 0.0)) {
        throw Error(ErrorCode::DegenerateGeometry, "neighborhood points coincide");
    }
    s.sigma = s.eigenvalues[0] / trace;
    return s;
}

PointCloud mask_to_cloud(const DepthImage& depth, const BinaryMask& mask,
                         const CameraIntrinsics& intr) {
    if (depth.width() != mask.width() || depth.height() != mask.height()) {
        throw Error(ErrorCode::DimensionMismatch, "depth and mask sizes differ");
    }
    PointCloud cloud;
    for (int r = 0; r < mask.height(); ++r) {
        for (int c = 0; c < mask.width(); ++c) {
            if (!mask.at(r, c) || depth.at(r, c) == 0) continue;
            cloud.points.push_back(deproject_pixel(c, r, depth.at(r, c), intr));
        }
    }
    if (cloud.empty()) throw Error(ErrorCode::EmptyCloud, "no masked pixel has valid depth");
    return cloud;
}

PointCloud voxel_downsample(const PointCloud& cloud, double voxel) {
    if (!(voxel > 0.0)) throw Error(ErrorCode::InvalidArgument, "voxel size must be positive");
    std::unordered_map<VoxelKey, std::size_t, VoxelKeyHash> slot;
    std::vector<Vec3> sums;
    std::vector<std::size_t> counts;
    for (const Vec3& p : cloud.points) {
        const VoxelKey key{static_cast<std::int64_t>(std::floor(p.x() / voxel)),
                           static_cast<std::int64_t>(std::floor(p.y() / voxel)),
                           static_cast<std::int64_t>(std::floor(p.z() / voxel))};
        const auto [it, inserted] = slot.try_emplace(key, sums.size());
        if (inserted) {
            sums.push_back(Vec3::Zero());
            counts.push_back(0);
        }
        sums[it->second] += p;
        ++counts[it->second];
    }
    PointCloud out;
    out.frame = cloud.frame;
    out.points.reserve(sums.size());
    for (std::size_t i = 0; i < sums.size(); ++i) {
        out.points.push_back(sums[i] / static_cast<double>(counts[i]));
    }
    return out;
}

PointCloud radius_outlier_removal(const PointCloud& cloud, double radius, int min_neighbors) {
    if (!(radius > 0.0) || min_neighbors < 1) {
        throw Error(ErrorCode::InvalidArgument, "outlier removal needs radius > 0 and min_neighbors >= 1");
    }
    PointCloud out;
    out.frame = cloud.frame;
    if (cloud.empty()) return out;
    const KdTree tree(cloud.points);
    // The query point itself is always within range.
    const std::size_t needed = static_cast<std::size_t>(min_neighbors) + 1;
    for (const Vec3& p : cloud.points) {
        if (tree.count_within(p, radius, needed) >= needed) out.points.push_back(p);
    }
    return out;
}

std::vector<std::size_t> knn(const PointCloud& cloud, const Vec3& query, std::size_t k) {
    if (cloud.empty()) throw Error(ErrorCode::EmptyCloud, "knn on an empty cloud");
    if (k < 1) throw Error(ErrorCode::InvalidArgument, "k must be at least 1");
    return KdTree(cloud.points).knn(query, k);
}

PointCloud preprocess(const PointCloud& cloud, const PreprocessParams& params) {
    return radius_outlier_removal(voxel_downsample(cloud, params.voxel), params.outlier_radius,
                                  params.outlier_min);
}

Pixel resolve_center_pixel(Pixel center, const DepthImage& depth, const BinaryMask& mask,
                           int search_radius) {
    const auto usable = [&](int r, int c) {
        return depth.contains(r, c) && depth.at(r, c) != 0 && mask.get(r, c);
    };
    if (usable(center.row, center.col)) return center;
    std::optional<Pixel> best;
    int best_d2 = std::numeric_limits<int>::max();
    for (int dr = -search_radius; dr <= search_radius; ++dr) {
        for (int dc = -search_radius; dc <= search_radius; ++dc) {
            const int d2 = dr * dr + dc * dc;
            if (d2 > search_radius * search_radius) continue;
            const Pixel p{center.row + dr, center.col + dc};
            if (!usable(p.row, p.col)) continue;
            if (d2 < best_d2 || (d2 == best_d2 && p < *best)) {
                best_d2 = d2;
                best = p;
            }
        }
    }
    if (!best) {
        throw Error(ErrorCode::NoDetection, "no valid depth near the skeleton center");
    }
    return *best;
}

GraspSelection select_grasp_point(const PointCloud& cloud, Pixel center_pixel,
                                  const DepthImage& depth, const BinaryMask& mask,
                                  const CameraIntrinsics& intr, const SelectionParams& params) {
    if (cloud.empty()) throw Error(ErrorCode::EmptyCloud, "collar cloud is empty");
    if (params.big_n < 1 || params.small_n < 1) {
        throw Error(ErrorCode::InvalidArgument, "neighborhood sizes must be at least 1");
    }

    GraspSelection sel;
    sel.center_pixel = resolve_center_pixel(center_pixel, depth, mask, params.hole_search_radius);
    sel.center_point = deproject_pixel(sel.center_pixel.col, sel.center_pixel.row,
                                       depth.at(sel.center_pixel.row, sel.center_pixel.col), intr);

    const KdTree tree(cloud.points);
    sel.candidates = tree.knn(sel.center_point, params.big_n);
    sel.candidate_sigma.reserve(sel.candidates.size());

    double best_sigma = -1.0;
    std::size_t best = cloud.size();
    for (std::size_t idx : sel.candidates) {
        const std::vector<Vec3> hood = gather(cloud, tree.knn(cloud.points[idx], params.small_n));
        double sigma = 0.0;
        try {
            sigma = local_surface_stats(hood).sigma;
        } catch (const Error& e) {
            if (e.code() != ErrorCode::DegenerateGeometry) throw;
        }
        sel.candidate_sigma.push_back(sigma);
        if (sigma > best_sigma || (sigma == best_sigma && idx < best)) {
            best_sigma = sigma;
            best = idx;
        }
    }

    sel.grasp_index = best;
    sel.grasp_point = cloud.points[best];
    sel.grasp_region = tree.knn(sel.grasp_point, params.small_n);
    sel.region_stats = local_surface_stats(gather(cloud, sel.grasp_region));
    return sel;
}

void write_ply(const std::filesystem::path& path, const PointCloud& cloud) {
    std::ofstream out(path);
    if (!out) throw Error(ErrorCode::Io, "cannot write " + path.string());
    out << "ply\nformat ascii 1.0\nelement vertex " << cloud.size()
        << "\nproperty float x\nproperty float y\nproperty float z\nend_header\n";
    for (const Vec3& p : cloud.points) {
        out << static_cast<float>(p.x()) << ' ' << static_cast<float>(p.y()) << ' '
            << static_cast<float>(p.z()) << '\n';
    }
}

}  // namespace collar
