#pragma once

#include "collar/types.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace collar {

struct Hsv {
    double h = 0.0;  // degrees in [0, 360)
    double s = 0.0;  // [0, 1]
    double v = 0.0;  // [0, 1]
};

// Hexcone model. Hue is 0 for achromatic input.
Hsv rgb_to_hsv(std::uint8_t r, std::uint8_t g, std::uint8_t b);

struct HsvThresholds {
    double h_min = 200.0;
    double h_max = 260.0;
    double s_min = 0.4;
    double v_min = 0.2;

    void validate() const;
};

/// A pixel is set iff h in [h_min, h_max], s >= s_min and v >= v_min.
BinaryMask extract_blue_mask(const RgbImage& img, const HsvThresholds& th = {});

enum class Split { Train, Val, Test };
std::string_view to_string(Split split);

struct ManifestEntry {
    std::string depth;
    std::string mask;
    int frame = 0;
    std::optional<std::string> garment;

    friend bool operator==(const ManifestEntry&, const ManifestEntry&) = default;
};

struct DatasetManifest {
    Split split = Split::Train;
    std::uint64_t shuffle_seed = 0;
    std::vector<ManifestEntry> entries;
};

struct SplitFractions {
    double train = 0.72;
    double val = 0.18;
    double test = 0.10;
};

struct DatasetOptions {
    std::uint64_t seed = 0;
    SplitFractions splits;
    HsvThresholds thresholds;
    bool drop_empty = false;
    // When set, every subdirectory is one held-out garment forming the test
    // split, and the main directory is divided between train and val only.
    std::optional<std::filesystem::path> test_garments_dir;
};

struct Dataset {
    DatasetManifest train;
    DatasetManifest val;
    DatasetManifest test;
};

/// Frame indices in `dir` with both frame_%06d_rgb.png and frame_%06d_depth.png,
/// ascending. Throws MissingPair if either file of a pair is absent.
std::vector<int> scan_frames(const std::filesystem::path& dir);

/// Deterministic Fisher-Yates permutation of [0, n) from a 64-bit Mersenne
/// twister, identical on every platform.
std::vector<std::size_t> seeded_permutation(std::size_t n, std::uint64_t seed);

/// Labels every frame, writes frame_%06d_mask.png under out_dir (per-garment
/// subdirectories for held-out garments) and returns the shuffled splits.
Dataset build_dataset(const std::filesystem::path& frames_dir, const std::filesystem::path& out_dir,
                      const DatasetOptions& options = {});

// JSON lines: {"depth": ..., "mask": ..., "frame": n[, "garment": id]}
void write_manifest(const std::filesystem::path& path, const DatasetManifest& manifest);
DatasetManifest read_manifest(const std::filesystem::path& path);

std::string frame_name(int frame, std::string_view kind);

}  // namespace collar
