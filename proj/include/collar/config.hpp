#pragma once

#include "collar/labeler.hpp"
#include "collar/pipeline.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace collar {

/// Every tunable of the pipeline, grouped by module prefix:
///
///   mask.link_dist  mask.dilate_radius  mask.dilate_iters  mask.morphology
///   mask.diagonal_weight  cloud.voxel  cloud.outlier_radius  cloud.outlier_min
///   cloud.big_n  cloud.small_n  cloud.hole_search_radius  pose.approach_offset
///   label.h_min  label.h_max  label.s_min  label.v_min
///   camera.intrinsics  camera.extrinsics
struct PipelineConfig {
    PipelineParams pipeline;
    HsvThresholds hsv;
    std::optional<std::filesystem::path> intrinsics_path;
    std::optional<std::filesystem::path> extrinsics_path;

    // Throws Config on an unknown key or a value that does not parse.
    void set(std::string_view key, std::string_view value);
    // Throws Config when any value violates its module's preconditions.
    void validate() const;

    static const std::vector<std::string>& keys();
};

/// Key-value document: `key = value` lines, `#` comments, optional `[section]`
/// headers that prefix following keys, and double-quoted strings.
void apply_config_text(PipelineConfig& config, std::string_view text);
void apply_config_file(PipelineConfig& config, const std::filesystem::path& path);

}  // namespace collar
