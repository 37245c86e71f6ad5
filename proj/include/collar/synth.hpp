#pragma once

#include "collar/pipeline.hpp"
#include "collar/types.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace collar {

/// Planted fold: a Gaussian-profile ridge raised toward the camera along a
/// circular arc (or straight segment) lying in a plane of constant depth.
/// Coordinates are camera-frame meters.
struct RidgeArc {
    bool straight = false;
    Eigen::Vector2d center = Eigen::Vector2d::Zero();  // arc
    double radius = 0.0;
    double start_angle = 0.0;
    double span = 0.0;  // radians, positive
    Eigen::Vector2d a = Eigen::Vector2d::Zero();  // segment
    Eigen::Vector2d b = Eigen::Vector2d::Zero();

    double length() const;
    // Point at arc length s in [0, length()].
    Eigen::Vector2d at(double s) const;
    // Distance in the image plane to the curve, and arc length of the closest point.
    double distance(const Eigen::Vector2d& p, double* s = nullptr) const;
};

struct SceneParams {
    int width = 640;
    int height = 480;
    CameraIntrinsics intrinsics{525.0, 525.0, 319.5, 239.5, 0.001};
    double table_depth = 0.80;
    double base_amplitude = 0.004;  // peak of the low-frequency height field
    double ridge_height = 0.015;
    double ridge_width = 0.008;     // standard deviation of the cross profile
    double taper_length = 0.02;     // ramp at each ridge end
    double noise_std = 0.0005;
    int ridge_count = 1;
    double min_ridge_separation = 0.03;  // extra clearance between ridge bands
    bool straight = false;
    double min_radius = 0.08;
    double max_radius = 0.20;
    double min_span = 1.0;  // radians
    double max_span = 2.4;

    void validate() const;
};

struct PlantedRidge {
    RidgeArc path;
    double height = 0.0;
    std::vector<Vec3> fold_curve;    // crest polyline
    std::vector<Vec3> fold_normals;  // surface normal (toward camera) per vertex
    std::size_t mask_pixels = 0;     // band pixels owned by this ridge
};

struct SyntheticScene {
    SceneParams params;
    std::uint64_t seed = 0;
    DepthImage depth;
    std::vector<double> surface_depth;  // noise-free rendered z per pixel, meters
    BinaryMask gt_mask;
    std::vector<PlantedRidge> ridges;
    // Height-field terms: amplitude, wave vector x, wave vector y, phase.
    std::vector<std::array<double, 4>> base_waves;

    const std::vector<Vec3>& fold_curve() const { return ridges.front().fold_curve; }

    // Surface depth z at image-plane position (x, y), noise-free.
    double surface(double x, double y) const;
    Vec3 surface_normal(double x, double y) const;
};

SyntheticScene generate_scene(const SceneParams& params, std::uint64_t seed);

// Distance from p to a polyline; optionally the closest vertex index.
double distance_to_polyline(const Vec3& p, const std::vector<Vec3>& line,
                            std::size_t* nearest_vertex = nullptr);

/// Brute-force surface variation for each point: full distance sort, naive
/// double-loop covariance and a reference eigen solver.
std::vector<double> oracle_sigma(const PointCloud& cloud, std::size_t n);
std::vector<double> oracle_sigma(const PointCloud& cloud, std::size_t n,
                                 const std::vector<std::size_t>& indices);

struct TrialCriteria {
    double max_distance = 0.010;
    double max_angle_deg = 30.0;
};

struct TrialResult {
    std::uint64_t seed = 0;
    bool success = false;
    std::string reason;  // "ok", "far-from-fold", "orientation", or an error code
    std::optional<GraspPlan> plan;
    double distance_to_fold = 0.0;
    double angle_deg = 0.0;
    int ridge = -1;  // nearest ridge
    std::size_t ridges_within_tolerance = 0;
};

/// Full pipeline on the scene depth with the ground-truth mask as the
/// segmentation, scored against the planted fold nearest the grasp point.
TrialResult run_trial(const SyntheticScene& scene, const PipelineParams& params = {},
                      const TrialCriteria& criteria = {});

/// Same scene and preprocessing, but candidates, sigma and the grasp frame
/// come from brute-force routines.
TrialResult run_oracle_trial(const SyntheticScene& scene, const PipelineParams& params = {},
                             const TrialCriteria& criteria = {});

TrialResult score_grasp(const SyntheticScene& scene, const GraspPlan& plan,
                        const TrialCriteria& criteria);

// Scene bundle: depth.png, mask.png, intrinsics.json and scene.json.
void save_scene(const std::filesystem::path& dir, const SyntheticScene& scene);
// Loads what trials need: depth, mask, intrinsics and planted ridges.
SyntheticScene load_scene(const std::filesystem::path& dir);

nlohmann::json to_json(const TrialResult& r);

}  // namespace collar
