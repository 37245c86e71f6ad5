#include "collar/pose.hpp"

#include "collar/calibration_io.hpp"
#include "collar/camera.hpp"
#include "collar/error.hpp"

#include <cmath>

namespace collar {
namespace {

bool nearly_equal(double a, double b, double scale) {
    return std::abs(a - b) <= kEigenGapTolerance * scale;
}

// Unit vector orthogonal to `z`, as close as possible to camera +X.
Vec3 lateral_axis(const Vec3& z) {
    Vec3 y = Vec3::UnitX() - Vec3::UnitX().dot(z) * z;
    if (y.norm() < 1e-6) y = Vec3::UnitY() - Vec3::UnitY().dot(z) * z;
    return y.normalized();
}

Vec3 sign_major_axis(Vec3 y) {
    if (y.x() < 0.0 || (y.x() == 0.0 && y.y() < 0.0) ||
        (y.x() == 0.0 && y.y() == 0.0 && y.z() < 0.0)) {
        y = -y;
    }
    return y;
}

nlohmann::json pose_json(const GraspPose& pose) {
    nlohmann::json rot = nlohmann::json::array();
    for (int i = 0; i < 9; ++i) rot.push_back(pose.orientation(i / 3, i % 3));
    return {{"position", {pose.position.x(), pose.position.y(), pose.position.z()}},
            {"rotation", rot}};
}

GraspPose pose_from_json(const nlohmann::json& j, Frame frame) {
    GraspPose p;
    p.frame = frame;
    const auto& pos = j.at("position");
    const auto& rot = j.at("rotation");
    if (pos.size() != 3 || rot.size() != 9) {
        throw Error(ErrorCode::InvalidArgument, "pose needs 3 position and 9 rotation values");
    }
    for (int i = 0; i < 3; ++i) p.position[i] = pos[i].get<double>();
    for (int i = 0; i < 9; ++i) p.orientation(i / 3, i % 3) = rot[i].get<double>();
    return p;
}

}  // namespace

std::string_view to_string(Confidence c) {
    return c == Confidence::Normal ? "normal" : "low";
}

OrientationEstimate estimate_orientation(const LocalSurfaceStats& stats, const Vec3& view_point) {
    const Vec3& ev = stats.eigenvalues;
    const double scale = ev.cwiseAbs().maxCoeff();
    if (!(ev.sum() > 0.0)) {
        throw Error(ErrorCode::DegenerateGeometry, "grasp region has zero spread");
    }

    Vec3 view = view_point - stats.centroid;
    if (view.norm() == 0.0) view = -Vec3::UnitZ();
    view.normalize();

    const bool normal_ambiguous = nearly_equal(ev[0], ev[1], scale);
    const bool major_ambiguous = nearly_equal(ev[1], ev[2], scale);

    OrientationEstimate out;
    Vec3 z;
    Vec3 y;
    if (!normal_ambiguous && !major_ambiguous) {
        z = stats.normal();
        if (z.dot(view) < 0.0) z = -z;
        y = sign_major_axis(stats.major_axis());
    } else {
        out.confidence = Confidence::Low;
        if (normal_ambiguous && !major_ambiguous) {
            // Major axis is defined; the normal is taken toward the viewer.
            y = sign_major_axis(stats.major_axis());
            z = view - view.dot(y) * y;
            if (z.norm() < 1e-6) z = stats.normal();
            z.normalize();
            if (z.dot(view) < 0.0) z = -z;
        } else if (!normal_ambiguous) {
            z = stats.normal();
            if (z.dot(view) < 0.0) z = -z;
            y = lateral_axis(z);
        } else {
            z = view;
            y = lateral_axis(z);
        }
    }
    const Vec3 x = y.cross(z).normalized();
    y = z.cross(x);
    out.orientation.col(0) = x;
    out.orientation.col(1) = y;
    out.orientation.col(2) = z;
    return out;
}

GraspPlan build_grasp_plan(const Vec3& grasp_point, const Mat3& orientation,
                           double approach_offset, Confidence confidence) {
    if (!is_rotation(orientation, 1e-8)) {
        throw Error(ErrorCode::InvalidArgument, "grasp orientation is not a rotation");
    }
    GraspPlan plan;
    plan.approach_offset = approach_offset;
    plan.confidence = confidence;
    plan.goal.position = grasp_point;
    plan.goal.orientation = orientation;
    plan.pre_grasp.position = grasp_point + approach_offset * orientation.col(2);
    plan.pre_grasp.orientation = orientation;
    return plan;
}

GraspPlan build_grasp_plan(const GraspSelection& grasp, const OrientationEstimate& orientation,
                           double approach_offset) {
    return build_grasp_plan(grasp.grasp_point, orientation.orientation, approach_offset,
                            orientation.confidence);
}

GraspPlan plan_to_world(const GraspPlan& plan, const Extrinsics& ext) {
    GraspPlan out = plan;
    out.goal = transform_pose(plan.goal, ext);
    out.pre_grasp = transform_pose(plan.pre_grasp, ext);
    return out;
}

nlohmann::json to_json(const GraspPlan& plan) {
    return {{"frame", to_string(plan.goal.frame)},
            {"goal", pose_json(plan.goal)},
            {"pre_grasp", pose_json(plan.pre_grasp)},
            {"confidence", to_string(plan.confidence)}};
}

GraspPlan grasp_plan_from_json(const nlohmann::json& j) {
    try {
        const std::string frame_name = j.at("frame").get<std::string>();
        if (frame_name != "camera" && frame_name != "world") {
            throw Error(ErrorCode::InvalidArgument, "unknown frame '" + frame_name + "'");
        }
        const Frame frame = frame_name == "camera" ? Frame::Camera : Frame::World;
        GraspPlan plan;
        plan.goal = pose_from_json(j.at("goal"), frame);
        plan.pre_grasp = pose_from_json(j.at("pre_grasp"), frame);
        plan.approach_offset = (plan.pre_grasp.position - plan.goal.position).norm();
        plan.confidence = j.at("confidence").get<std::string>() == "low" ? Confidence::Low
                                                                          : Confidence::Normal;
        return plan;
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::InvalidArgument, std::string("malformed grasp plan: ") + e.what());
    }
}

}  // namespace collar
