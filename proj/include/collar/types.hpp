#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <span>
#include <vector>

namespace collar {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

struct Pixel {
    int row = 0;
    int col = 0;

    friend auto operator<=>(const Pixel&, const Pixel&) = default;
};

/// Row-major 16-bit depth image. A value of 0 marks a hole.
class DepthImage {
public:
    DepthImage() = default;
    DepthImage(int width, int height);
    DepthImage(int width, int height, std::vector<std::uint16_t> data);

    int width() const { return width_; }
    int height() const { return height_; }
    bool empty() const { return data_.empty(); }

    std::uint16_t at(int row, int col) const { return data_[index(row, col)]; }
    std::uint16_t& at(int row, int col) { return data_[index(row, col)]; }
    bool contains(int row, int col) const {
        return row >= 0 && col >= 0 && row < height_ && col < width_;
    }

    std::span<const std::uint16_t> data() const { return data_; }

    friend bool operator==(const DepthImage&, const DepthImage&) = default;

private:
    std::size_t index(int row, int col) const {
        return static_cast<std::size_t>(row) * width_ + col;
    }

    int width_ = 0;
    int height_ = 0;
    std::vector<std::uint16_t> data_;
};

/// Interleaved 8-bit RGB image.
class RgbImage {
public:
    RgbImage() = default;
    RgbImage(int width, int height);
    RgbImage(int width, int height, std::vector<std::uint8_t> data);

    int width() const { return width_; }
    int height() const { return height_; }

    const std::uint8_t* at(int row, int col) const { return &data_[index(row, col)]; }
    std::uint8_t* at(int row, int col) { return &data_[index(row, col)]; }
    void set(int row, int col, std::uint8_t r, std::uint8_t g, std::uint8_t b);

    std::span<const std::uint8_t> data() const { return data_; }

private:
    std::size_t index(int row, int col) const {
        return 3 * (static_cast<std::size_t>(row) * width_ + col);
    }

    int width_ = 0;
    int height_ = 0;
    std::vector<std::uint8_t> data_;
};

/// Per-pixel collar membership.
class BinaryMask {
public:
    BinaryMask() = default;
    BinaryMask(int width, int height);
    BinaryMask(int width, int height, std::vector<std::uint8_t> bits);

    int width() const { return width_; }
    int height() const { return height_; }

    bool at(int row, int col) const { return bits_[index(row, col)] != 0; }
    void set(int row, int col, bool value = true) { bits_[index(row, col)] = value ? 1 : 0; }
    bool contains(int row, int col) const {
        return row >= 0 && col >= 0 && row < height_ && col < width_;
    }
    // Out-of-bounds reads as background.
    bool get(int row, int col) const { return contains(row, col) && at(row, col); }

    std::size_t count() const;
    bool any() const { return count() > 0; }
    bool same_shape(const BinaryMask& other) const {
        return width_ == other.width_ && height_ == other.height_;
    }

    // Set pixels in row-major order.
    std::vector<Pixel> pixels() const;

    std::span<const std::uint8_t> bits() const { return bits_; }

    friend bool operator==(const BinaryMask&, const BinaryMask&) = default;

private:
    std::size_t index(int row, int col) const {
        return static_cast<std::size_t>(row) * width_ + col;
    }

    int width_ = 0;
    int height_ = 0;
    std::vector<std::uint8_t> bits_;
};

struct CameraIntrinsics {
    double fx = 0.0;
    double fy = 0.0;
    double cx = 0.0;
    double cy = 0.0;
    double depth_scale = 0.001;  // meters per raw depth unit

    // Throws InvalidArgument on non-positive focal lengths or scale.
    void validate() const;
    // Also checks the principal point against the image size.
    void validate(int width, int height) const;
};

/// Camera-to-world rigid transform.
class Extrinsics {
public:
    Extrinsics() = default;
    // Throws InvalidArgument unless rotation is orthonormal with det +1 within 1e-9.
    Extrinsics(const Mat3& rotation, const Vec3& translation);

    const Mat3& rotation() const { return rotation_; }
    const Vec3& translation() const { return translation_; }

private:
    Mat3 rotation_ = Mat3::Identity();
    Vec3 translation_ = Vec3::Zero();
};

enum class Frame { Camera, World };

struct PointCloud {
    std::vector<Vec3> points;
    Frame frame = Frame::Camera;

    std::size_t size() const { return points.size(); }
    bool empty() const { return points.empty(); }
};

/// Position plus orientation frame with columns X, Y, Z.
struct GraspPose {
    Vec3 position = Vec3::Zero();
    Mat3 orientation = Mat3::Identity();
    Frame frame = Frame::Camera;
};

bool is_rotation(const Mat3& m, double tol = 1e-9);

}  // namespace collar
