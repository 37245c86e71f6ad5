#pragma once

#include "collar/cloud_ops.hpp"
#include "collar/types.hpp"

#include <json.hpp>

namespace collar {

enum class Confidence { Normal, Low };

struct OrientationEstimate {
    Mat3 orientation = Mat3::Identity();  // columns X, Y, Z
    Confidence confidence = Confidence::Normal;
};

// Relative eigenvalue gap below which two eigenvectors are treated as
// interchangeable.
inline constexpr double kEigenGapTolerance = 1e-9;

/// Grasp frame from the region PCA: Z is the normal v0 turned toward
/// `view_point`, Y is the major axis v2 signed to have a non-negative camera
/// +X component (then +Y on ties), and X = Y x Z.
///
/// When v0 or v2 is not unique the frame is rebuilt from whatever axis is
/// still defined plus the view direction, and flagged Low.
OrientationEstimate estimate_orientation(const LocalSurfaceStats& region_stats,
                                         const Vec3& view_point = Vec3::Zero());

struct GraspPlan {
    GraspPose goal;
    GraspPose pre_grasp;
    double approach_offset = 0.050;
    Confidence confidence = Confidence::Normal;
};

/// Goal at the grasp point; pre-grasp backed off along +Z by approach_offset.
GraspPlan build_grasp_plan(const Vec3& grasp_point, const Mat3& orientation,
                           double approach_offset = 0.050,
                           Confidence confidence = Confidence::Normal);
GraspPlan build_grasp_plan(const GraspSelection& grasp, const OrientationEstimate& orientation,
                           double approach_offset = 0.050);

GraspPlan plan_to_world(const GraspPlan& plan, const Extrinsics& ext);

nlohmann::json to_json(const GraspPlan& plan);
GraspPlan grasp_plan_from_json(const nlohmann::json& j);

std::string_view to_string(Confidence c);

}  // namespace collar
