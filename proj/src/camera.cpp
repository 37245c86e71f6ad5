#include "collar/camera.hpp"

#include "collar/error.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace collar {

std::string_view to_string(ErrorCode code) {
    switch (code) {
        case ErrorCode::InvalidArgument: return "invalid-argument";
        case ErrorCode::InvalidDepth: return "invalid-depth";
        case ErrorCode::BehindCamera: return "behind-camera";
        case ErrorCode::NoDetection: return "no-detection";
        case ErrorCode::EmptyCloud: return "empty-cloud";
        case ErrorCode::DegenerateGeometry: return "degenerate-geometry";
        case ErrorCode::InsufficientPoints: return "insufficient-points";
        case ErrorCode::DimensionMismatch: return "dimension-mismatch";
        case ErrorCode::Io: return "io";
        case ErrorCode::MissingPair: return "missing-pair";
        case ErrorCode::MissingPrediction: return "missing-prediction";
        case ErrorCode::Config: return "config";
    }
    return "unknown";
}

int exit_code(ErrorCode code) {
    switch (code) {
        case ErrorCode::NoDetection:
        case ErrorCode::EmptyCloud:
            return 2;
        case ErrorCode::DegenerateGeometry:
        case ErrorCode::InsufficientPoints:
            return 3;
        case ErrorCode::Io:
        case ErrorCode::MissingPair:
        case ErrorCode::MissingPrediction:
            return 4;
        default:
            return 1;
    }
}

DepthImage::DepthImage(int width, int height)
    : DepthImage(width, height,
                 std::vector<std::uint16_t>(static_cast<std::size_t>(std::max(width, 0)) *
                                            std::max(height, 0))) {}

DepthImage::DepthImage(int width, int height, std::vector<std::uint16_t> data)
    : width_(width), height_(height), data_(std::move(data)) {
    if (width < 0 || height < 0 ||
        data_.size() != static_cast<std::size_t>(width) * static_cast<std::size_t>(height)) {
        throw Error(ErrorCode::DimensionMismatch, "depth data length does not match width x height");
    }
}

RgbImage::RgbImage(int width, int height)
    : RgbImage(width, height,
               std::vector<std::uint8_t>(3 * static_cast<std::size_t>(std::max(width, 0)) *
                                         std::max(height, 0))) {}

RgbImage::RgbImage(int width, int height, std::vector<std::uint8_t> data)
    : width_(width), height_(height), data_(std::move(data)) {
    if (width < 0 || height < 0 ||
        data_.size() != 3 * static_cast<std::size_t>(width) * static_cast<std::size_t>(height)) {
        throw Error(ErrorCode::DimensionMismatch, "rgb data length does not match 3 x width x height");
    }
}

void RgbImage::set(int row, int col, std::uint8_t r, std::uint8_t g, std::uint8_t b) {
    std::uint8_t* px = at(row, col);
    px[0] = r;
    px[1] = g;
    px[2] = b;
}

BinaryMask::BinaryMask(int width, int height)
    : BinaryMask(width, height,
                 std::vector<std::uint8_t>(static_cast<std::size_t>(std::max(width, 0)) *
                                           std::max(height, 0))) {}

BinaryMask::BinaryMask(int width, int height, std::vector<std::uint8_t> bits)
    : width_(width), height_(height), bits_(std::move(bits)) {
    if (width < 0 || height < 0 ||
        bits_.size() != static_cast<std::size_t>(width) * static_cast<std::size_t>(height)) {
        throw Error(ErrorCode::DimensionMismatch, "mask length does not match width x height");
    }
    for (auto& b : bits_) b = b ? 1 : 0;
}

std::size_t BinaryMask::count() const {
    return static_cast<std::size_t>(std::count(bits_.begin(), bits_.end(), std::uint8_t{1}));
}

std::vector<Pixel> BinaryMask::pixels() const {
    std::vector<Pixel> out;
    for (int r = 0; r < height_; ++r) {
        for (int c = 0; c < width_; ++c) {
            if (at(r, c)) out.push_back({r, c});
        }
    }
    return out;
}

void CameraIntrinsics::validate() const {
    if (!(fx > 0.0) || !(fy > 0.0) || !(depth_scale > 0.0) || !std::isfinite(cx) ||
        !std::isfinite(cy)) {
        throw Error(ErrorCode::InvalidArgument,
                    "intrinsics require fx > 0, fy > 0, depth_scale > 0 and a finite principal point");
    }
}

void CameraIntrinsics::validate(int width, int height) const {
    validate();
    if (cx < 0.0 || cy < 0.0 || cx >= width || cy >= height) {
        throw Error(ErrorCode::InvalidArgument, "principal point lies outside the image");
    }
}

bool is_rotation(const Mat3& m, double tol) {
    if (!m.allFinite()) return false;
    const Mat3 gram = m.transpose() * m;
    return (gram - Mat3::Identity()).cwiseAbs().maxCoeff() <= tol &&
           std::abs(m.determinant() - 1.0) <= tol;
}

Extrinsics::Extrinsics(const Mat3& rotation, const Vec3& translation)
    : rotation_(rotation), translation_(translation) {
    if (!is_rotation(rotation) || !translation.allFinite()) {
        throw Error(ErrorCode::InvalidArgument,
                    "extrinsic rotation must be orthonormal with determinant +1");
    }
}

Vec3 deproject_pixel(double u, double v, double depth_raw, const CameraIntrinsics& intr) {
    if (!(depth_raw > 0.0)) {
        throw Error(ErrorCode::InvalidDepth, "cannot de-project a pixel with zero depth");
    }
    const double z = depth_raw * intr.depth_scale;
    return {(u - intr.cx) * z / intr.fx, (v - intr.cy) * z / intr.fy, z};
}

ProjectedPixel project_point(const Vec3& p, const CameraIntrinsics& intr) {
    if (!(p.z() > 0.0)) {
        throw Error(ErrorCode::BehindCamera, "point is not in front of the camera");
    }
    return {intr.fx * p.x() / p.z() + intr.cx, intr.fy * p.y() / p.z() + intr.cy,
            p.z() / intr.depth_scale};
}

GraspPose transform_pose(const GraspPose& pose, const Extrinsics& ext) {
    if (pose.frame != Frame::Camera) {
        throw Error(ErrorCode::InvalidArgument, "transform_pose expects a camera-frame pose");
    }
    GraspPose out;
    out.position = ext.rotation() * pose.position + ext.translation();
    out.orientation = ext.rotation() * pose.orientation;
    out.frame = Frame::World;
    return out;
}

}  // namespace collar
