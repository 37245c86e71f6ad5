#pragma once

#include "collar/types.hpp"

#include <json.hpp>

#include <filesystem>

namespace collar {

// {"fx", "fy", "cx", "cy", "depth_scale"}; depth_scale is optional.
CameraIntrinsics intrinsics_from_json(const nlohmann::json& j);
nlohmann::json to_json(const CameraIntrinsics& intr);
CameraIntrinsics read_intrinsics(const std::filesystem::path& path);
void write_intrinsics(const std::filesystem::path& path, const CameraIntrinsics& intr);

// {"rotation": [9 row-major], "translation": [3]}
Extrinsics extrinsics_from_json(const nlohmann::json& j);
nlohmann::json to_json(const Extrinsics& ext);
Extrinsics read_extrinsics(const std::filesystem::path& path);

std::string_view to_string(Frame frame);

}  // namespace collar
