#pragma once

#include "collar/types.hpp"

#include <filesystem>
#include <span>
#include <vector>

namespace collar {

/// Neighborhood PCA: mean, biased (1/n) covariance, ascending eigenpairs and
/// surface variation sigma = l0 / (l0 + l1 + l2).
struct LocalSurfaceStats {
    Vec3 centroid = Vec3::Zero();
    Mat3 covariance = Mat3::Zero();
    Vec3 eigenvalues = Vec3::Zero();   // l0 <= l1 <= l2, clamped at 0
    Mat3 eigenvectors = Mat3::Identity();  // columns v0, v1, v2
    double sigma = 0.0;

    Vec3 normal() const { return eigenvectors.col(0); }
    Vec3 major_axis() const { return eigenvectors.col(2); }
};

// Throws InsufficientPoints on empty input and DegenerateGeometry when all
// points coincide.
LocalSurfaceStats local_surface_stats(std::span<const Vec3> points);

// Mean and 1/n covariance only.
Mat3 covariance(std::span<const Vec3> points, Vec3* centroid = nullptr);

/// One camera-frame point per set mask pixel with nonzero depth.
/// Throws DimensionMismatch or EmptyCloud.
PointCloud mask_to_cloud(const DepthImage& depth, const BinaryMask& mask,
                         const CameraIntrinsics& intr);

/// Centroid per occupied cell of an origin-anchored voxel grid. Output order
/// follows the first member of each cell.
PointCloud voxel_downsample(const PointCloud& cloud, double voxel);

/// Keeps points with at least `min_neighbors` other points within `radius`.
PointCloud radius_outlier_removal(const PointCloud& cloud, double radius, int min_neighbors);

/// Exact k nearest neighbors, nearest first; ties go to the lower index.
/// Throws EmptyCloud.
std::vector<std::size_t> knn(const PointCloud& cloud, const Vec3& query, std::size_t k);

struct PreprocessParams {
    double voxel = 0.005;
    double outlier_radius = 0.010;
    int outlier_min = 5;
};

PointCloud preprocess(const PointCloud& cloud, const PreprocessParams& params = {});

struct SelectionParams {
    std::size_t big_n = 50;    // candidates around the skeleton center
    std::size_t small_n = 50;  // neighborhood size for sigma
    int hole_search_radius = 5;
};

struct GraspSelection {
    Vec3 grasp_point = Vec3::Zero();
    std::size_t grasp_index = 0;
    std::vector<std::size_t> grasp_region;
    LocalSurfaceStats region_stats;
    Vec3 center_point = Vec3::Zero();
    Pixel center_pixel;  // pixel actually lifted, after hole fallback
    std::vector<std::size_t> candidates;
    std::vector<double> candidate_sigma;
};

/// Lifts the skeleton center to 3-d. When the pixel has no depth or lies off
/// the mask, the nearest masked pixel with valid depth within
/// `search_radius` is used instead (ties by row, col); NoDetection otherwise.
Pixel resolve_center_pixel(Pixel center, const DepthImage& depth, const BinaryMask& mask,
                           int search_radius);

/// Among the big_n cloud points nearest the lifted center, picks the one whose
/// small_n-neighborhood has the largest surface variation (ties by lower
/// index). Degenerate candidate neighborhoods score 0.
GraspSelection select_grasp_point(const PointCloud& cloud, Pixel center_pixel,
                                  const DepthImage& depth, const BinaryMask& mask,
                                  const CameraIntrinsics& intr,
                                  const SelectionParams& params = {});

// ASCII PLY with float x y z.
void write_ply(const std::filesystem::path& path, const PointCloud& cloud);

}  // namespace collar
