#pragma once

#include "collar/types.hpp"

namespace collar {

struct ProjectedPixel {
    double u = 0.0;
    double v = 0.0;
    double depth_raw = 0.0;
};

// Pinhole back-projection; +Z into the scene, +X right, +Y down.
Vec3 deproject_pixel(double u, double v, double depth_raw, const CameraIntrinsics& intr);

ProjectedPixel project_point(const Vec3& p, const CameraIntrinsics& intr);

GraspPose transform_pose(const GraspPose& pose, const Extrinsics& ext);

}  // namespace collar
