#include "collar/pipeline.hpp"

#include "collar/error.hpp"

namespace collar {

PipelineResult run_pipeline(const DepthImage& depth, const BinaryMask& mask,
                            const CameraIntrinsics& intr, const PipelineParams& params) {
    if (depth.width() != mask.width() || depth.height() != mask.height()) {
        throw Error(ErrorCode::DimensionMismatch, "depth and mask sizes differ");
    }
    intr.validate(depth.width(), depth.height());

    PipelineResult out;
    out.center = extract_center_detailed(mask, params.center);

    const PointCloud raw = mask_to_cloud(depth, out.center.cluster, intr);
    out.raw_cloud_size = raw.size();
    out.cloud = preprocess(raw, params.preprocess);
    if (out.cloud.empty()) {
        throw Error(ErrorCode::NoDetection, "collar cloud is empty after outlier removal");
    }

    out.selection = select_grasp_point(out.cloud, out.center.center, depth, out.center.cluster,
                                       intr, params.selection);
    out.orientation = estimate_orientation(out.selection.region_stats, Vec3::Zero());
    out.plan = build_grasp_plan(out.selection, out.orientation, params.approach_offset);
    return out;
}

}  // namespace collar
