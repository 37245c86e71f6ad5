#include "collar/synth.hpp"

#include "collar/calibration_io.hpp"
#include "collar/camera.hpp"
#include "collar/error.hpp"
#include "collar/image_io.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>
#include <random>

namespace fs = std::filesystem;

namespace collar {
namespace {

using Vec2 = Eigen::Vector2d;
constexpr double kPi = std::numbers::pi;

class SceneRng {
public:
    explicit SceneRng(std::uint64_t seed) : engine_(seed) {}

    // Uniform in [0, 1) from the top 53 bits.
    double unit() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
    double uniform(double lo, double hi) { return lo + (hi - lo) * unit(); }

    // Box-Muller on the raw engine, so scenes match across standard libraries.
    double normal() {
        if (spare_) {
            const double v = *spare_;
            spare_.reset();
            return v;
        }
        double u1 = unit();
        while (u1 <= 0.0) u1 = unit();
        const double u2 = unit();
        const double r = std::sqrt(-2.0 * std::log(u1));
        spare_ = r * std::sin(2.0 * kPi * u2);
        return r * std::cos(2.0 * kPi * u2);
    }

private:
    std::mt19937_64 engine_;
    std::optional<double> spare_;
};

double wrap_angle(double a) {
    a = std::fmod(a, 2.0 * kPi);
    return a < 0.0 ? a + 2.0 * kPi : a;
}

double smoothstep(double t) {
    t = std::clamp(t, 0.0, 1.0);
    return t * t * (3.0 - 2.0 * t);
}

double smoothstep_slope(double t) {
    if (t <= 0.0 || t >= 1.0) return 0.0;
    return 6.0 * t * (1.0 - t);
}

struct SurfaceSample {
    double z = 0.0;
    Vec2 grad = Vec2::Zero();  // dz/dx, dz/dy
};

// Ridge contribution (height toward the camera) and its gradient.
void ridge_term(const PlantedRidge& ridge, const SceneParams& p, const Vec2& xy, double& value,
                Vec2& grad) {
    const RidgeArc& path = ridge.path;
    const double len = path.length();
    Vec2 d_dist;  // gradient of the distance
    Vec2 d_s;     // gradient of the arc-length parameter
    double dist;
    double s;
    if (path.straight) {
        const Vec2 dir = (path.b - path.a) / len;
        const double t = (xy - path.a).dot(dir);
        if (t <= 0.0 || t >= len) return;  // taper is zero beyond the ends
        const Vec2 foot = path.a + t * dir;
        const Vec2 off = xy - foot;
        dist = off.norm();
        d_dist = dist > 0.0 ? Vec2(off / dist) : Vec2::Zero();
        s = t;
        d_s = dir;
    } else {
        const Vec2 q = xy - path.center;
        const double rq = q.norm();
        if (rq == 0.0) return;
        const double delta = wrap_angle(std::atan2(q.y(), q.x()) - path.start_angle);
        if (delta > path.span) return;
        dist = std::abs(rq - path.radius);
        d_dist = (rq >= path.radius ? 1.0 : -1.0) * q / rq;
        s = path.radius * delta;
        d_s = path.radius * Vec2(-q.y(), q.x()) / (rq * rq);
    }
    const double edge = std::min(s, len - s);
    const double d_edge_sign = s <= len - s ? 1.0 : -1.0;
    const double taper = smoothstep(edge / p.taper_length);
    if (taper == 0.0) return;
    const double dtaper = smoothstep_slope(edge / p.taper_length) / p.taper_length * d_edge_sign;
    const double w2 = p.ridge_width * p.ridge_width;
    const double gauss = std::exp(-dist * dist / (2.0 * w2));
    value += ridge.height * taper * gauss;
    grad += ridge.height * (dtaper * gauss * d_s - taper * gauss * dist / w2 * d_dist);
}

SurfaceSample sample_surface(const SyntheticScene& scene, const Vec2& xy) {
    SurfaceSample out;
    out.z = scene.params.table_depth;
    for (const auto& [amp, kx, ky, phase] : scene.base_waves) {
        const double arg = kx * xy.x() + ky * xy.y() + phase;
        out.z += amp * std::cos(arg);
        out.grad -= amp * std::sin(arg) * Vec2(kx, ky);
    }
    double ridge = 0.0;
    Vec2 ridge_grad = Vec2::Zero();
    for (const PlantedRidge& r : scene.ridges) ridge_term(r, scene.params, xy, ridge, ridge_grad);
    out.z -= ridge;
    out.grad -= ridge_grad;
    return out;
}

// Depth where the pixel ray meets the surface, by Newton iteration on
// z - S(a z, b z) = 0.
double render_ray(const SyntheticScene& scene, double a, double b) {
    double z = scene.params.table_depth;
    for (int it = 0; it < 50; ++it) {
        const SurfaceSample s = sample_surface(scene, {a * z, b * z});
        const double g = z - s.z;
        const double dg = 1.0 - (a * s.grad.x() + b * s.grad.y());
        const double step = g / dg;
        z -= step;
        if (std::abs(step) < 1e-13) break;
    }
    return z;
}

RidgeArc sample_path(SceneRng& rng, const SceneParams& p) {
    RidgeArc path;
    const double radius = rng.uniform(p.min_radius, p.max_radius);
    const double span = rng.uniform(p.min_span, p.max_span);
    const double zt = p.table_depth;
    const Vec2 lo((0.0 - p.intrinsics.cx) / p.intrinsics.fx * zt,
                  (0.0 - p.intrinsics.cy) / p.intrinsics.fy * zt);
    const Vec2 hi((p.width - 1 - p.intrinsics.cx) / p.intrinsics.fx * zt,
                  (p.height - 1 - p.intrinsics.cy) / p.intrinsics.fy * zt);
    const Vec2 mid(rng.uniform(lo.x(), hi.x()), rng.uniform(lo.y(), hi.y()));
    const double theta = rng.uniform(0.0, 2.0 * kPi);
    if (p.straight) {
        const double len = radius * span;
        const Vec2 dir(std::cos(theta), std::sin(theta));
        path.straight = true;
        path.a = mid - 0.5 * len * dir;
        path.b = mid + 0.5 * len * dir;
    } else {
        path.radius = radius;
        path.span = span;
        path.center = mid - radius * Vec2(std::cos(theta), std::sin(theta));
        path.start_angle = wrap_angle(theta - 0.5 * span);
    }
    return path;
}

bool inside_view(const RidgeArc& path, const SceneParams& p) {
    const double zt = p.table_depth;
    const double margin = 2.0 * p.ridge_width + 0.02;
    const Vec2 lo((0.0 - p.intrinsics.cx) / p.intrinsics.fx * zt + margin,
                  (0.0 - p.intrinsics.cy) / p.intrinsics.fy * zt + margin);
    const Vec2 hi((p.width - 1 - p.intrinsics.cx) / p.intrinsics.fx * zt - margin,
                  (p.height - 1 - p.intrinsics.cy) / p.intrinsics.fy * zt - margin);
    const double len = path.length();
    for (int i = 0; i <= 64; ++i) {
        const Vec2 q = path.at(len * i / 64.0);
        if (q.x() < lo.x() || q.y() < lo.y() || q.x() > hi.x() || q.y() > hi.y()) return false;
    }
    return true;
}

double path_separation(const RidgeArc& a, const RidgeArc& b) {
    double best = std::numeric_limits<double>::infinity();
    const double la = a.length();
    for (int i = 0; i <= 256; ++i) best = std::min(best, b.distance(a.at(la * i / 256.0)));
    return best;
}

nlohmann::json vec_json(const Vec3& v) { return {v.x(), v.y(), v.z()}; }
Vec3 vec_from(const nlohmann::json& j) { return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()}; }

nlohmann::json params_json(const SceneParams& p) {
    return {{"width", p.width},
            {"height", p.height},
            {"table_depth", p.table_depth},
            {"base_amplitude", p.base_amplitude},
            {"ridge_height", p.ridge_height},
            {"ridge_width", p.ridge_width},
            {"taper_length", p.taper_length},
            {"noise_std", p.noise_std},
            {"ridge_count", p.ridge_count},
            {"min_ridge_separation", p.min_ridge_separation},
            {"straight", p.straight},
            {"min_radius", p.min_radius},
            {"max_radius", p.max_radius},
            {"min_span", p.min_span},
            {"max_span", p.max_span}};
}

SceneParams params_from(const nlohmann::json& j) {
    SceneParams p;
    p.width = j.at("width").get<int>();
    p.height = j.at("height").get<int>();
    p.table_depth = j.at("table_depth").get<double>();
    p.base_amplitude = j.at("base_amplitude").get<double>();
    p.ridge_height = j.at("ridge_height").get<double>();
    p.ridge_width = j.at("ridge_width").get<double>();
    p.taper_length = j.at("taper_length").get<double>();
    p.noise_std = j.at("noise_std").get<double>();
    p.ridge_count = j.at("ridge_count").get<int>();
    p.min_ridge_separation = j.at("min_ridge_separation").get<double>();
    p.straight = j.at("straight").get<bool>();
    p.min_radius = j.at("min_radius").get<double>();
    p.max_radius = j.at("max_radius").get<double>();
    p.min_span = j.at("min_span").get<double>();
    p.max_span = j.at("max_span").get<double>();
    return p;
}

}  // namespace

double RidgeArc::length() const {
    return straight ? (b - a).norm() : radius * span;
}

Eigen::Vector2d RidgeArc::at(double s) const {
    if (straight) return a + (b - a) * (s / length());
    const double angle = start_angle + s / radius;
    return center + radius * Vec2(std::cos(angle), std::sin(angle));
}

double RidgeArc::distance(const Eigen::Vector2d& p, double* s_out) const {
    const double len = length();
    double s;
    double d;
    if (straight) {
        const Vec2 dir = (b - a) / len;
        s = std::clamp((p - a).dot(dir), 0.0, len);
        d = (p - (a + s * dir)).norm();
    } else {
        const Vec2 q = p - center;
        const double delta = wrap_angle(std::atan2(q.y(), q.x()) - start_angle);
        if (delta <= span) {
            s = radius * delta;
            d = std::abs(q.norm() - radius);
        } else {
            const double d0 = (p - at(0.0)).norm();
            const double d1 = (p - at(len)).norm();
            s = d0 <= d1 ? 0.0 : len;
            d = std::min(d0, d1);
        }
    }
    if (s_out) *s_out = s;
    return d;
}

void SceneParams::validate() const {
    if (!(ridge_height > 0.0) || !(ridge_width > 0.0)) {
        throw Error(ErrorCode::InvalidArgument, "ridge height and width must be positive");
    }
    if (width < 8 || height < 8 || !(table_depth > 0.0) || noise_std < 0.0 || ridge_count < 1 ||
        !(taper_length > 0.0) || !(min_radius > 0.0) || max_radius < min_radius ||
        !(min_span > 0.0) || max_span < min_span || max_span > 2.0 * kPi) {
        throw Error(ErrorCode::InvalidArgument, "invalid synthetic scene parameters");
    }
    intrinsics.validate(width, height);
}

double SyntheticScene::surface(double x, double y) const {
    return sample_surface(*this, {x, y}).z;
}

Vec3 SyntheticScene::surface_normal(double x, double y) const {
    const SurfaceSample s = sample_surface(*this, {x, y});
    return Vec3(s.grad.x(), s.grad.y(), -1.0).normalized();
}

SyntheticScene generate_scene(const SceneParams& params, std::uint64_t seed) {
    params.validate();
    SyntheticScene scene;
    scene.params = params;
    scene.seed = seed;
    SceneRng rng(seed);

    if (params.base_amplitude > 0.0) {
        for (int i = 0; i < 3; ++i) {
            const double amp = params.base_amplitude / 3.0 * rng.uniform(0.5, 1.0);
            const double wavelength = rng.uniform(0.25, 0.6);
            const double dir = rng.uniform(0.0, 2.0 * kPi);
            const double k = 2.0 * kPi / wavelength;
            scene.base_waves.push_back(
                {amp, k * std::cos(dir), k * std::sin(dir), rng.uniform(0.0, 2.0 * kPi)});
        }
    }

    const double clearance = 4.0 * params.ridge_width + params.min_ridge_separation;
    for (int k = 0; k < params.ridge_count; ++k) {
        bool placed = false;
        for (int attempt = 0; attempt < 2000 && !placed; ++attempt) {
            RidgeArc path = sample_path(rng, params);
            if (!inside_view(path, params)) continue;
            bool clear = true;
            for (const PlantedRidge& other : scene.ridges) {
                if (path_separation(path, other.path) < clearance) clear = false;
            }
            if (!clear) continue;
            PlantedRidge ridge;
            ridge.path = path;
            ridge.height = params.ridge_height;
            scene.ridges.push_back(std::move(ridge));
            placed = true;
        }
        if (!placed) {
            throw Error(ErrorCode::InvalidArgument, "could not place all ridges in the view");
        }
    }

    const CameraIntrinsics& intr = params.intrinsics;
    const int w = params.width;
    const int h = params.height;
    scene.surface_depth.resize(static_cast<std::size_t>(w) * h);
    scene.depth = DepthImage(w, h);
    scene.gt_mask = BinaryMask(w, h);
    const double band = 2.0 * params.ridge_width;
    for (int r = 0; r < h; ++r) {
        const double b = (r - intr.cy) / intr.fy;
        for (int c = 0; c < w; ++c) {
            const double a = (c - intr.cx) / intr.fx;
            const double z = render_ray(scene, a, b);
            scene.surface_depth[static_cast<std::size_t>(r) * w + c] = z;
            const double noisy = z + params.noise_std * rng.normal();
            const double raw = std::round(noisy / intr.depth_scale);
            scene.depth.at(r, c) = static_cast<std::uint16_t>(std::clamp(raw, 1.0, 65535.0));

            const Vec2 xy(a * z, b * z);
            int owner = -1;
            double best = std::numeric_limits<double>::infinity();
            for (std::size_t i = 0; i < scene.ridges.size(); ++i) {
                const double d = scene.ridges[i].path.distance(xy);
                if (d < best) {
                    best = d;
                    owner = static_cast<int>(i);
                }
            }
            if (best <= band) {
                scene.gt_mask.set(r, c);
                ++scene.ridges[owner].mask_pixels;
            }
        }
    }

    for (PlantedRidge& ridge : scene.ridges) {
        const double len = ridge.path.length();
        const int samples = std::max(2, static_cast<int>(std::ceil(len / 0.001)) + 1);
        for (int i = 0; i < samples; ++i) {
            const Vec2 q = ridge.path.at(len * i / (samples - 1));
            ridge.fold_curve.emplace_back(q.x(), q.y(), scene.surface(q.x(), q.y()));
            ridge.fold_normals.push_back(scene.surface_normal(q.x(), q.y()));
        }
    }
    return scene;
}

double distance_to_polyline(const Vec3& p, const std::vector<Vec3>& line,
                            std::size_t* nearest_vertex) {
    double best = std::numeric_limits<double>::infinity();
    std::size_t best_vertex = 0;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const double dv = (p - line[i]).norm();
        if (dv < (p - line[best_vertex]).norm()) best_vertex = i;
        if (i + 1 == line.size()) {
            best = std::min(best, dv);
            continue;
        }
        const Vec3 seg = line[i + 1] - line[i];
        const double len2 = seg.squaredNorm();
        const double t = len2 > 0.0 ? std::clamp((p - line[i]).dot(seg) / len2, 0.0, 1.0) : 0.0;
        best = std::min(best, (p - (line[i] + t * seg)).norm());
    }
    if (nearest_vertex) *nearest_vertex = best_vertex;
    return best;
}

std::vector<double> oracle_sigma(const PointCloud& cloud, std::size_t n,
                                 const std::vector<std::size_t>& indices) {
    if (cloud.size() < n || n == 0) {
        throw Error(ErrorCode::InsufficientPoints, "oracle_sigma needs |cloud| >= n >= 1");
    }
    std::vector<double> out;
    out.reserve(indices.size());
    std::vector<std::pair<double, std::size_t>> order(cloud.size());
    for (std::size_t i : indices) {
        for (std::size_t j = 0; j < cloud.size(); ++j) {
            order[j] = {(cloud.points[j] - cloud.points[i]).squaredNorm(), j};
        }
        std::sort(order.begin(), order.end());

        double mean[3] = {0.0, 0.0, 0.0};
        for (std::size_t j = 0; j < n; ++j) {
            for (int d = 0; d < 3; ++d) mean[d] += cloud.points[order[j].second][d];
        }
        for (double& m : mean) m /= static_cast<double>(n);
        Mat3 cov = Mat3::Zero();
        for (int a = 0; a < 3; ++a) {
            for (int b = 0; b < 3; ++b) {
                double acc = 0.0;
                for (std::size_t j = 0; j < n; ++j) {
                    const Vec3& p = cloud.points[order[j].second];
                    acc += (p[a] - mean[a]) * (p[b] - mean[b]);
                }
                cov(a, b) = acc / static_cast<double>(n);
            }
        }
        const Eigen::SelfAdjointEigenSolver<Mat3> solver(cov, Eigen::EigenvaluesOnly);
        const Vec3 ev = solver.eigenvalues().cwiseMax(0.0);
        const double trace = ev.sum();
        out.push_back(trace > 0.0 ? ev[0] / trace : 0.0);
    }
    return out;
}

std::vector<double> oracle_sigma(const PointCloud& cloud, std::size_t n) {
    std::vector<std::size_t> all(cloud.size());
    for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
    return oracle_sigma(cloud, n, all);
}

TrialResult score_grasp(const SyntheticScene& scene, const GraspPlan& plan,
                        const TrialCriteria& criteria) {
    TrialResult r;
    r.seed = scene.seed;
    r.plan = plan;
    const Vec3& p = plan.goal.position;
    double best = std::numeric_limits<double>::infinity();
    std::size_t vertex = 0;
    for (std::size_t i = 0; i < scene.ridges.size(); ++i) {
        std::size_t v = 0;
        const double d = distance_to_polyline(p, scene.ridges[i].fold_curve, &v);
        if (d <= criteria.max_distance) ++r.ridges_within_tolerance;
        if (d < best) {
            best = d;
            vertex = v;
            r.ridge = static_cast<int>(i);
        }
    }
    r.distance_to_fold = best;
    const Vec3& normal = scene.ridges[r.ridge].fold_normals[vertex];
    const double cosang = std::clamp(plan.goal.orientation.col(2).dot(normal), -1.0, 1.0);
    r.angle_deg = std::acos(cosang) * 180.0 / kPi;
    if (best > criteria.max_distance) {
        r.reason = "far-from-fold";
    } else if (r.angle_deg > criteria.max_angle_deg) {
        r.reason = "orientation";
    } else {
        r.reason = "ok";
        r.success = true;
    }
    return r;
}

TrialResult run_trial(const SyntheticScene& scene, const PipelineParams& params,
                      const TrialCriteria& criteria) {
    try {
        const PipelineResult res = run_pipeline(scene.depth, scene.gt_mask,
                                                scene.params.intrinsics, params);
        return score_grasp(scene, res.plan, criteria);
    } catch (const Error& e) {
        TrialResult r;
        r.seed = scene.seed;
        r.reason = std::string(to_string(e.code()));
        return r;
    }
}

TrialResult run_oracle_trial(const SyntheticScene& scene, const PipelineParams& params,
                             const TrialCriteria& criteria) {
    try {
        const CameraIntrinsics& intr = scene.params.intrinsics;
        const CenterExtraction center = extract_center_detailed(scene.gt_mask, params.center);
        const PointCloud cloud =
            preprocess(mask_to_cloud(scene.depth, center.cluster, intr), params.preprocess);
        if (cloud.empty()) throw Error(ErrorCode::NoDetection, "empty cloud");
        const Pixel px = resolve_center_pixel(center.center, scene.depth, center.cluster,
                                              params.selection.hole_search_radius);
        const Vec3 p = deproject_pixel(px.col, px.row, scene.depth.at(px.row, px.col), intr);

        const auto sorted_from = [&](const Vec3& q, std::size_t k) {
            std::vector<std::pair<double, std::size_t>> order;
            for (std::size_t j = 0; j < cloud.size(); ++j) {
                order.emplace_back((cloud.points[j] - q).squaredNorm(), j);
            }
            std::sort(order.begin(), order.end());
            std::vector<std::size_t> out;
            for (std::size_t j = 0; j < std::min(k, order.size()); ++j) out.push_back(order[j].second);
            return out;
        };

        const std::size_t n = std::min(params.selection.small_n, cloud.size());
        const std::vector<std::size_t> candidates = sorted_from(p, params.selection.big_n);
        const std::vector<double> sigma = oracle_sigma(cloud, n, candidates);
        std::size_t best = candidates.front();
        double best_sigma = -1.0;
        for (std::size_t i = 0; i < candidates.size(); ++i) {
            if (sigma[i] > best_sigma || (sigma[i] == best_sigma && candidates[i] < best)) {
                best_sigma = sigma[i];
                best = candidates[i];
            }
        }

        std::vector<Vec3> region;
        for (std::size_t j : sorted_from(cloud.points[best], n)) region.push_back(cloud.points[j]);
        LocalSurfaceStats stats;
        for (const Vec3& q : region) stats.centroid += q;
        stats.centroid /= static_cast<double>(region.size());
        for (const Vec3& q : region) {
            stats.covariance += (q - stats.centroid) * (q - stats.centroid).transpose();
        }
        stats.covariance /= static_cast<double>(region.size());
        const Eigen::SelfAdjointEigenSolver<Mat3> solver(stats.covariance);
        stats.eigenvalues = solver.eigenvalues().cwiseMax(0.0);
        stats.eigenvectors = solver.eigenvectors();
        if (!(stats.eigenvalues.sum() > 0.0)) {
            throw Error(ErrorCode::DegenerateGeometry, "grasp region points coincide");
        }
        stats.sigma = stats.eigenvalues[0] / stats.eigenvalues.sum();

        const OrientationEstimate orient = estimate_orientation(stats, Vec3::Zero());
        const GraspPlan plan = build_grasp_plan(cloud.points[best], orient.orientation,
                                                params.approach_offset, orient.confidence);
        return score_grasp(scene, plan, criteria);
    } catch (const Error& e) {
        TrialResult r;
        r.seed = scene.seed;
        r.reason = std::string(to_string(e.code()));
        return r;
    }
}

void save_scene(const fs::path& dir, const SyntheticScene& scene) {
    fs::create_directories(dir);
    write_depth_png(dir / "depth.png", scene.depth);
    write_mask_png(dir / "mask.png", scene.gt_mask);
    write_intrinsics(dir / "intrinsics.json", scene.params.intrinsics);

    nlohmann::json ridges = nlohmann::json::array();
    for (const PlantedRidge& r : scene.ridges) {
        nlohmann::json curve = nlohmann::json::array();
        nlohmann::json normals = nlohmann::json::array();
        for (std::size_t i = 0; i < r.fold_curve.size(); ++i) {
            curve.push_back(vec_json(r.fold_curve[i]));
            normals.push_back(vec_json(r.fold_normals[i]));
        }
        nlohmann::json path = {{"straight", r.path.straight}};
        if (r.path.straight) {
            path["a"] = {r.path.a.x(), r.path.a.y()};
            path["b"] = {r.path.b.x(), r.path.b.y()};
        } else {
            path["center"] = {r.path.center.x(), r.path.center.y()};
            path["radius"] = r.path.radius;
            path["start_angle"] = r.path.start_angle;
            path["span"] = r.path.span;
        }
        ridges.push_back({{"path", path},
                          {"height", r.height},
                          {"mask_pixels", r.mask_pixels},
                          {"fold_curve", curve},
                          {"fold_normals", normals}});
    }
    nlohmann::json waves = nlohmann::json::array();
    for (const auto& w : scene.base_waves) waves.push_back({w[0], w[1], w[2], w[3]});
    const nlohmann::json doc = {{"seed", scene.seed},
                                {"params", params_json(scene.params)},
                                {"base_waves", waves},
                                {"ridges", ridges}};
    std::ofstream out(dir / "scene.json");
    if (!out) throw Error(ErrorCode::Io, "cannot write " + (dir / "scene.json").string());
    out << doc.dump(1) << '\n';
}

SyntheticScene load_scene(const fs::path& dir) {
    std::ifstream in(dir / "scene.json");
    if (!in) throw Error(ErrorCode::Io, "cannot open " + (dir / "scene.json").string());
    SyntheticScene scene;
    try {
        const nlohmann::json doc = nlohmann::json::parse(in);
        scene.seed = doc.at("seed").get<std::uint64_t>();
        scene.params = params_from(doc.at("params"));
        for (const auto& w : doc.at("base_waves")) {
            scene.base_waves.push_back({w[0].get<double>(), w[1].get<double>(), w[2].get<double>(),
                                        w[3].get<double>()});
        }
        for (const auto& jr : doc.at("ridges")) {
            PlantedRidge r;
            const auto& path = jr.at("path");
            r.path.straight = path.at("straight").get<bool>();
            if (r.path.straight) {
                r.path.a = {path["a"][0].get<double>(), path["a"][1].get<double>()};
                r.path.b = {path["b"][0].get<double>(), path["b"][1].get<double>()};
            } else {
                r.path.center = {path["center"][0].get<double>(), path["center"][1].get<double>()};
                r.path.radius = path.at("radius").get<double>();
                r.path.start_angle = path.at("start_angle").get<double>();
                r.path.span = path.at("span").get<double>();
            }
            r.height = jr.at("height").get<double>();
            r.mask_pixels = jr.at("mask_pixels").get<std::size_t>();
            for (const auto& v : jr.at("fold_curve")) r.fold_curve.push_back(vec_from(v));
            for (const auto& v : jr.at("fold_normals")) r.fold_normals.push_back(vec_from(v));
            scene.ridges.push_back(std::move(r));
        }
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::Io, (dir / "scene.json").string() + ": " + e.what());
    }
    scene.params.intrinsics = read_intrinsics(dir / "intrinsics.json");
    scene.depth = read_depth_png(dir / "depth.png");
    scene.gt_mask = read_mask_png(dir / "mask.png");
    return scene;
}

nlohmann::json to_json(const TrialResult& r) {
    nlohmann::json j = {{"seed", r.seed},
                        {"success", r.success},
                        {"reason", r.reason}};
    if (r.plan) {
        j["distance_to_fold"] = r.distance_to_fold;
        j["angle_deg"] = r.angle_deg;
        j["ridge"] = r.ridge;
        j["plan"] = to_json(*r.plan);
    }
    return j;
}

}  // namespace collar
