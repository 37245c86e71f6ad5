#include "collar/config.hpp"

#include "collar/error.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

namespace collar {
namespace {

std::string_view trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::string unquote(std::string_view v) {
    if (v.size() >= 2 && v.front() == '"' && v.back() == '"') return std::string(v.substr(1, v.size() - 2));
    return std::string(v);
}

double parse_double(std::string_view key, std::string_view v) {
    const std::string s = unquote(v);
    double out = 0.0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
    if (ec != std::errc() || ptr != s.data() + s.size()) {
        throw Error(ErrorCode::Config, "'" + std::string(key) + "' expects a number, got '" + s + "'");
    }
    return out;
}

long long parse_int(std::string_view key, std::string_view v) {
    const std::string s = unquote(v);
    long long out = 0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
    if (ec != std::errc() || ptr != s.data() + s.size()) {
        throw Error(ErrorCode::Config, "'" + std::string(key) + "' expects an integer, got '" + s + "'");
    }
    return out;
}

void require(bool ok, const char* what) {
    if (!ok) throw Error(ErrorCode::Config, what);
}

}  // namespace

const std::vector<std::string>& PipelineConfig::keys() {
    static const std::vector<std::string> k = {
        "mask.link_dist",   "mask.dilate_radius",   "mask.dilate_iters",
        "mask.morphology",  "mask.diagonal_weight", "cloud.voxel",
        "cloud.outlier_radius", "cloud.outlier_min", "cloud.big_n",
        "cloud.small_n",    "cloud.hole_search_radius", "pose.approach_offset",
        "label.h_min",      "label.h_max",          "label.s_min",
        "label.v_min",      "camera.intrinsics",    "camera.extrinsics",
    };
    return k;
}

void PipelineConfig::set(std::string_view key, std::string_view value) {
    auto& c = pipeline.center;
    auto& pre = pipeline.preprocess;
    auto& sel = pipeline.selection;
    if (key == "mask.link_dist") c.link_dist = parse_double(key, value);
    else if (key == "mask.dilate_radius") c.dilate_radius = static_cast<int>(parse_int(key, value));
    else if (key == "mask.dilate_iters") c.dilate_iters = static_cast<int>(parse_int(key, value));
    else if (key == "mask.morphology") {
        const std::string v = unquote(value);
        if (v == "dilate") c.morphology = Morphology::Dilate;
        else if (v == "close") c.morphology = Morphology::Close;
        else throw Error(ErrorCode::Config, "mask.morphology must be 'dilate' or 'close'");
    }
    else if (key == "mask.diagonal_weight") c.diagonal_weight = parse_double(key, value);
    else if (key == "cloud.voxel") pre.voxel = parse_double(key, value);
    else if (key == "cloud.outlier_radius") pre.outlier_radius = parse_double(key, value);
    else if (key == "cloud.outlier_min") pre.outlier_min = static_cast<int>(parse_int(key, value));
    else if (key == "cloud.big_n") {
        const long long v = parse_int(key, value);
        require(v >= 1, "cloud.big_n must be at least 1");
        sel.big_n = static_cast<std::size_t>(v);
    }
    else if (key == "cloud.small_n") {
        const long long v = parse_int(key, value);
        require(v >= 1, "cloud.small_n must be at least 1");
        sel.small_n = static_cast<std::size_t>(v);
    }
    else if (key == "cloud.hole_search_radius") sel.hole_search_radius = static_cast<int>(parse_int(key, value));
    else if (key == "pose.approach_offset") pipeline.approach_offset = parse_double(key, value);
    else if (key == "label.h_min") hsv.h_min = parse_double(key, value);
    else if (key == "label.h_max") hsv.h_max = parse_double(key, value);
    else if (key == "label.s_min") hsv.s_min = parse_double(key, value);
    else if (key == "label.v_min") hsv.v_min = parse_double(key, value);
    else if (key == "camera.intrinsics") intrinsics_path = unquote(value);
    else if (key == "camera.extrinsics") extrinsics_path = unquote(value);
    else throw Error(ErrorCode::Config, "unknown config key '" + std::string(key) + "'");
}

void PipelineConfig::validate() const {
    const auto& c = pipeline.center;
    const auto& pre = pipeline.preprocess;
    const auto& sel = pipeline.selection;
    require(c.link_dist > 0.0, "mask.link_dist must be positive");
    require(c.dilate_radius >= 1, "mask.dilate_radius must be at least 1");
    require(c.dilate_iters >= 1, "mask.dilate_iters must be at least 1");
    require(c.diagonal_weight > 0.0, "mask.diagonal_weight must be positive");
    require(pre.voxel > 0.0, "cloud.voxel must be positive");
    require(pre.outlier_radius > 0.0, "cloud.outlier_radius must be positive");
    require(pre.outlier_min >= 1, "cloud.outlier_min must be at least 1");
    require(sel.big_n >= 1 && sel.small_n >= 1, "cloud.big_n and cloud.small_n must be at least 1");
    require(sel.hole_search_radius >= 0, "cloud.hole_search_radius must be non-negative");
    require(pipeline.approach_offset >= 0.0, "pose.approach_offset must be non-negative");
    try {
        hsv.validate();
    } catch (const Error& e) {
        throw Error(ErrorCode::Config, e.what());
    }
}

void apply_config_text(PipelineConfig& config, std::string_view text) {
    std::string section;
    std::istringstream in{std::string(text)};
    std::string raw;
    int lineno = 0;
    while (std::getline(in, raw)) {
        ++lineno;
        std::string_view line = raw;
        if (const auto hash = line.find('#'); hash != std::string_view::npos) {
            // '#' inside a quoted string is kept.
            const auto quote = line.find('"');
            if (quote == std::string_view::npos || hash < quote) line = line.substr(0, hash);
        }
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']') {
                throw Error(ErrorCode::Config, "line " + std::to_string(lineno) + ": malformed section");
            }
            section = std::string(trim(line.substr(1, line.size() - 2)));
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string_view::npos) {
            throw Error(ErrorCode::Config, "line " + std::to_string(lineno) + ": expected key = value");
        }
        std::string key(trim(line.substr(0, eq)));
        if (!section.empty()) key = section + "." + key;
        config.set(key, trim(line.substr(eq + 1)));
    }
}

void apply_config_file(PipelineConfig& config, const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::Io, "cannot open config " + path.string());
    std::stringstream buf;
    buf << in.rdbuf();
    apply_config_text(config, buf.str());
}

}  // namespace collar
