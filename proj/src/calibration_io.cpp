#include "collar/calibration_io.hpp"

#include "collar/error.hpp"

#include <fstream>

namespace collar {
namespace {

nlohmann::json load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::Io, "cannot open " + path.string());
    try {
        return nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::Io, path.string() + ": " + e.what());
    }
}

double number(const nlohmann::json& j, const char* key) {
    if (!j.contains(key) || !j.at(key).is_number()) {
        throw Error(ErrorCode::InvalidArgument, std::string("missing numeric field '") + key + "'");
    }
    return j.at(key).get<double>();
}

}  // namespace

std::string_view to_string(Frame frame) {
    return frame == Frame::Camera ? "camera" : "world";
}

CameraIntrinsics intrinsics_from_json(const nlohmann::json& j) {
    CameraIntrinsics intr;
    intr.fx = number(j, "fx");
    intr.fy = number(j, "fy");
    intr.cx = number(j, "cx");
    intr.cy = number(j, "cy");
    if (j.contains("depth_scale")) intr.depth_scale = number(j, "depth_scale");
    intr.validate();
    return intr;
}

nlohmann::json to_json(const CameraIntrinsics& intr) {
    return {{"fx", intr.fx}, {"fy", intr.fy}, {"cx", intr.cx}, {"cy", intr.cy},
            {"depth_scale", intr.depth_scale}};
}

CameraIntrinsics read_intrinsics(const std::filesystem::path& path) {
    return intrinsics_from_json(load(path));
}

void write_intrinsics(const std::filesystem::path& path, const CameraIntrinsics& intr) {
    std::ofstream out(path);
    if (!out) throw Error(ErrorCode::Io, "cannot write " + path.string());
    out << to_json(intr).dump(2) << '\n';
}

Extrinsics extrinsics_from_json(const nlohmann::json& j) {
    const auto& rot = j.at("rotation");
    const auto& tr = j.at("translation");
    if (!rot.is_array() || rot.size() != 9 || !tr.is_array() || tr.size() != 3) {
        throw Error(ErrorCode::InvalidArgument,
                    "extrinsics need 'rotation' (9 numbers) and 'translation' (3 numbers)");
    }
    Mat3 r;
    for (int i = 0; i < 9; ++i) r(i / 3, i % 3) = rot[i].get<double>();
    Vec3 t(tr[0].get<double>(), tr[1].get<double>(), tr[2].get<double>());
    return Extrinsics(r, t);
}

nlohmann::json to_json(const Extrinsics& ext) {
    nlohmann::json rot = nlohmann::json::array();
    for (int i = 0; i < 9; ++i) rot.push_back(ext.rotation()(i / 3, i % 3));
    return {{"rotation", rot},
            {"translation", {ext.translation().x(), ext.translation().y(), ext.translation().z()}}};
}

Extrinsics read_extrinsics(const std::filesystem::path& path) {
    try {
        return extrinsics_from_json(load(path));
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::InvalidArgument, path.string() + ": " + e.what());
    }
}

}  // namespace collar
