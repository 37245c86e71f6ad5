#include "collar/labeler.hpp"

#include "collar/error.hpp"
#include "collar/image_io.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <random>
#include <regex>

namespace fs = std::filesystem;

namespace collar {
namespace {

std::uint64_t bounded(std::mt19937_64& rng, std::uint64_t bound) {
    // Rejection sampling keeps the draw unbiased and library-independent.
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                                std::numeric_limits<std::uint64_t>::max() % bound;
    std::uint64_t x;
    do {
        x = rng();
    } while (x >= limit);
    return x % bound;
}

struct FrameSource {
    int index;
    fs::path dir;
    std::optional<std::string> garment;
};

ManifestEntry label_frame(const FrameSource& f, const fs::path& out_dir, const HsvThresholds& th,
                          bool& empty) {
    const RgbImage rgb = read_rgb_png(f.dir / frame_name(f.index, "rgb"));
    const fs::path depth_path = f.dir / frame_name(f.index, "depth");
    const DepthImage depth = read_depth_png(depth_path);
    if (depth.width() != rgb.width() || depth.height() != rgb.height()) {
        throw Error(ErrorCode::DimensionMismatch,
                    "rgb and depth sizes differ for frame " + std::to_string(f.index));
    }
    const BinaryMask mask = extract_blue_mask(rgb, th);
    empty = !mask.any();
    const fs::path dir = f.garment ? out_dir / *f.garment : out_dir;
    fs::create_directories(dir);
    const fs::path mask_path = dir / frame_name(f.index, "mask");
    write_mask_png(mask_path, mask);
    return {depth_path.generic_string(), mask_path.generic_string(), f.index, f.garment};
}

}  // namespace

Hsv rgb_to_hsv(std::uint8_t r8, std::uint8_t g8, std::uint8_t b8) {
    const double r = r8 / 255.0;
    const double g = g8 / 255.0;
    const double b = b8 / 255.0;
    const double mx = std::max({r, g, b});
    const double mn = std::min({r, g, b});
    const double delta = mx - mn;
    Hsv out;
    out.v = mx;
    out.s = mx > 0.0 ? delta / mx : 0.0;
    if (delta > 0.0) {
        double h;
        if (mx == r) {
            h = 60.0 * std::fmod((g - b) / delta, 6.0);
        } else if (mx == g) {
            h = 60.0 * ((b - r) / delta + 2.0);
        } else {
            h = 60.0 * ((r - g) / delta + 4.0);
        }
        if (h < 0.0) h += 360.0;
        if (h >= 360.0) h -= 360.0;
        out.h = h;
    }
    return out;
}

void HsvThresholds::validate() const {
    if (!(h_min >= 0.0 && h_max < 360.0 && h_min < h_max) || s_min < 0.0 || s_min > 1.0 ||
        v_min < 0.0 || v_min > 1.0) {
        throw Error(ErrorCode::InvalidArgument,
                    "HSV thresholds need 0 <= h_min < h_max < 360 and s_min, v_min in [0, 1]");
    }
}

BinaryMask extract_blue_mask(const RgbImage& img, const HsvThresholds& th) {
    th.validate();
    BinaryMask mask(img.width(), img.height());
    for (int r = 0; r < img.height(); ++r) {
        for (int c = 0; c < img.width(); ++c) {
            const std::uint8_t* px = img.at(r, c);
            const Hsv hsv = rgb_to_hsv(px[0], px[1], px[2]);
            mask.set(r, c, hsv.h >= th.h_min && hsv.h <= th.h_max && hsv.s >= th.s_min &&
                               hsv.v >= th.v_min);
        }
    }
    return mask;
}

std::string_view to_string(Split split) {
    switch (split) {
        case Split::Train: return "train";
        case Split::Val: return "val";
        case Split::Test: return "test";
    }
    return "train";
}

std::string frame_name(int frame, std::string_view kind) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "frame_%06d_", frame);
    return std::string(buf) + std::string(kind) + ".png";
}

std::vector<int> scan_frames(const fs::path& dir) {
    if (!fs::is_directory(dir)) throw Error(ErrorCode::Io, dir.string() + " is not a directory");
    static const std::regex pattern(R"(frame_(\d{6})_(rgb|depth)\.png)");
    std::map<int, int> seen;  // bit 1 = rgb, bit 2 = depth
    for (const auto& entry : fs::directory_iterator(dir)) {
        if (!entry.is_regular_file()) continue;
        std::smatch m;
        const std::string name = entry.path().filename().string();
        if (!std::regex_match(name, m, pattern)) continue;
        seen[std::stoi(m[1])] |= m[2] == "rgb" ? 1 : 2;
    }
    std::vector<int> frames;
    std::vector<std::string> missing;
    for (const auto& [index, bits] : seen) {
        if (bits == 3) {
            frames.push_back(index);
        } else {
            missing.push_back(frame_name(index, bits == 1 ? "depth" : "rgb"));
        }
    }
    if (!missing.empty()) {
        std::string msg = "missing pair file(s) in " + dir.string() + ":";
        for (const auto& m : missing) msg += " " + m;
        throw Error(ErrorCode::MissingPair, msg);
    }
    return frames;
}

std::vector<std::size_t> seeded_permutation(std::size_t n, std::uint64_t seed) {
    std::vector<std::size_t> perm(n);
    for (std::size_t i = 0; i < n; ++i) perm[i] = i;
    std::mt19937_64 rng(seed);
    for (std::size_t i = n; i > 1; --i) {
        const std::size_t j = static_cast<std::size_t>(bounded(rng, i));
        std::swap(perm[i - 1], perm[j]);
    }
    return perm;
}

Dataset build_dataset(const fs::path& frames_dir, const fs::path& out_dir,
                      const DatasetOptions& options) {
    options.thresholds.validate();
    const SplitFractions& sp = options.splits;
    if (sp.train < 0.0 || sp.val < 0.0 || sp.test < 0.0 ||
        std::abs(sp.train + sp.val + sp.test - 1.0) > 1e-9) {
        throw Error(ErrorCode::InvalidArgument, "split fractions must be non-negative and sum to 1");
    }

    std::vector<FrameSource> frames;
    for (int idx : scan_frames(frames_dir)) frames.push_back({idx, frames_dir, std::nullopt});

    std::vector<FrameSource> held_out;
    if (options.test_garments_dir) {
        std::vector<fs::path> garments;
        for (const auto& entry : fs::directory_iterator(*options.test_garments_dir)) {
            if (entry.is_directory()) garments.push_back(entry.path());
        }
        std::sort(garments.begin(), garments.end());
        for (const fs::path& g : garments) {
            for (int idx : scan_frames(g)) held_out.push_back({idx, g, g.filename().string()});
        }
    }

    fs::create_directories(out_dir);
    const auto label_all = [&](const std::vector<FrameSource>& list) {
        std::vector<ManifestEntry> entries;
        for (const FrameSource& f : list) {
            bool empty = false;
            ManifestEntry e = label_frame(f, out_dir, options.thresholds, empty);
            if (!(empty && options.drop_empty)) entries.push_back(std::move(e));
        }
        return entries;
    };
    const std::vector<ManifestEntry> main = label_all(frames);

    const std::vector<std::size_t> perm = seeded_permutation(main.size(), options.seed);
    const double n = static_cast<double>(main.size());
    double train_frac = sp.train;
    double val_frac = sp.val;
    if (options.test_garments_dir) {
        const double tv = sp.train + sp.val;
        train_frac = tv > 0.0 ? sp.train / tv : 0.0;
        val_frac = tv > 0.0 ? sp.val / tv : 0.0;
    }
    // Boundaries round half up; the nudge keeps e.g. (0.72 + 0.18) * 25 from
    // landing just under .5 in binary floating point.
    const auto boundary = [n](double frac) {
        return static_cast<std::size_t>(std::floor(frac * n + 0.5 + 1e-9));
    };
    const std::size_t train_end = boundary(train_frac);
    const std::size_t val_end = options.test_garments_dir
                                    ? main.size()
                                    : boundary(train_frac + val_frac);

    Dataset ds;
    ds.train = {Split::Train, options.seed, {}};
    ds.val = {Split::Val, options.seed, {}};
    ds.test = {Split::Test, options.seed, {}};
    for (std::size_t i = 0; i < perm.size(); ++i) {
        auto& target = i < train_end ? ds.train : i < val_end ? ds.val : ds.test;
        target.entries.push_back(main[perm[i]]);
    }
    if (options.test_garments_dir) {
        std::vector<ManifestEntry> test = label_all(held_out);
        const std::vector<std::size_t> tperm = seeded_permutation(test.size(), options.seed);
        for (std::size_t i : tperm) ds.test.entries.push_back(test[i]);
    }
    return ds;
}

void write_manifest(const fs::path& path, const DatasetManifest& manifest) {
    std::ofstream out(path);
    if (!out) throw Error(ErrorCode::Io, "cannot write " + path.string());
    for (const ManifestEntry& e : manifest.entries) {
        nlohmann::json j = {{"depth", e.depth}, {"mask", e.mask}, {"frame", e.frame}};
        if (e.garment) j["garment"] = *e.garment;
        out << j.dump() << '\n';
    }
}

DatasetManifest read_manifest(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::Io, "cannot open " + path.string());
    DatasetManifest m;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        try {
            const auto j = nlohmann::json::parse(line);
            ManifestEntry e;
            e.depth = j.at("depth").get<std::string>();
            e.mask = j.at("mask").get<std::string>();
            e.frame = j.at("frame").get<int>();
            if (j.contains("garment")) e.garment = j.at("garment").get<std::string>();
            m.entries.push_back(std::move(e));
        } catch (const nlohmann::json::exception& ex) {
            throw Error(ErrorCode::Io,
                        path.string() + ":" + std::to_string(lineno) + ": " + ex.what());
        }
    }
    return m;
}

}  // namespace collar
