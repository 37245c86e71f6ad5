#pragma once

#include "collar/cloud_ops.hpp"
#include "collar/mask_ops.hpp"
#include "collar/pose.hpp"
#include "collar/types.hpp"

namespace collar {

struct PipelineParams {
    CenterParams center;
    PreprocessParams preprocess;
    SelectionParams selection;
    double approach_offset = 0.050;
};

struct PipelineResult {
    CenterExtraction center;
    std::size_t raw_cloud_size = 0;
    PointCloud cloud;  // preprocessed collar cloud
    GraspSelection selection;
    OrientationEstimate orientation;
    GraspPlan plan;  // camera frame
};

/// Center extraction on the mask, de-projection of the largest cluster,
/// voxel + outlier filtering, surface-variation grasp selection, PCA
/// orientation and pre-grasp construction.
PipelineResult run_pipeline(const DepthImage& depth, const BinaryMask& mask,
                            const CameraIntrinsics& intr, const PipelineParams& params = {});

}  // namespace collar
