// Command-line entry point: grasp, label, eval, synth gen, synth trial.

#include "collar/calibration_io.hpp"
#include "collar/config.hpp"
#include "collar/error.hpp"
#include "collar/eval.hpp"
#include "collar/image_io.hpp"
#include "collar/labeler.hpp"
#include "collar/pipeline.hpp"
#include "collar/synth.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <thread>

namespace fs = std::filesystem;
using namespace collar;

namespace {

struct Overrides {
    std::optional<std::string> config;
    std::optional<double> link_dist;
    std::optional<int> dilate_radius;
    std::optional<int> dilate_iters;
    std::optional<double> voxel;
    std::optional<double> outlier_radius;
    std::optional<int> outlier_min;
    std::optional<std::size_t> big_n;
    std::optional<std::size_t> small_n;
    std::optional<double> approach_offset;
    std::optional<std::string> intrinsics;
    std::optional<std::string> extrinsics;
};

void add_pipeline_flags(CLI::App* app, Overrides& o) {
    app->add_option("--config", o.config, "Key-value config file (falls back to $COLLAR_GRASP_CONFIG)");
    app->add_option("--link-dist", o.link_dist, "Clustering link distance, pixels");
    app->add_option("--dilate-radius", o.dilate_radius, "Dilation radius, pixels");
    app->add_option("--dilate-iters", o.dilate_iters, "Dilation iterations");
    app->add_option("--voxel", o.voxel, "Voxel size, meters");
    app->add_option("--outlier-radius", o.outlier_radius, "Outlier search radius, meters");
    app->add_option("--outlier-min", o.outlier_min, "Minimum neighbors to keep a point");
    app->add_option("--big-n", o.big_n, "Candidates around the skeleton center");
    app->add_option("--small-n", o.small_n, "Neighborhood size for surface variation");
    app->add_option("--approach-offset", o.approach_offset, "Pre-grasp offset, meters");
}

PipelineConfig resolve_config(const Overrides& o) {
    PipelineConfig cfg;
    if (o.config) {
        apply_config_file(cfg, *o.config);
    } else if (const char* env = std::getenv("COLLAR_GRASP_CONFIG"); env && *env) {
        apply_config_file(cfg, env);
    }
    auto& p = cfg.pipeline;
    if (o.link_dist) p.center.link_dist = *o.link_dist;
    if (o.dilate_radius) p.center.dilate_radius = *o.dilate_radius;
    if (o.dilate_iters) p.center.dilate_iters = *o.dilate_iters;
    if (o.voxel) p.preprocess.voxel = *o.voxel;
    if (o.outlier_radius) p.preprocess.outlier_radius = *o.outlier_radius;
    if (o.outlier_min) p.preprocess.outlier_min = *o.outlier_min;
    if (o.big_n) p.selection.big_n = *o.big_n;
    if (o.small_n) p.selection.small_n = *o.small_n;
    if (o.approach_offset) p.approach_offset = *o.approach_offset;
    if (o.intrinsics) cfg.intrinsics_path = *o.intrinsics;
    if (o.extrinsics) cfg.extrinsics_path = *o.extrinsics;
    cfg.validate();
    return cfg;
}

int cmd_grasp(const std::string& depth_path, const std::string& mask_path, const Overrides& o,
              const std::optional<std::string>& ply_path) {
    const PipelineConfig cfg = resolve_config(o);
    if (!cfg.intrinsics_path) {
        throw Error(ErrorCode::Config, "no intrinsics given (--intrinsics or camera.intrinsics)");
    }
    const CameraIntrinsics intr = read_intrinsics(*cfg.intrinsics_path);
    const DepthImage depth = read_depth_png(depth_path);
    const BinaryMask mask = read_mask_png(mask_path);

    const PipelineResult res = run_pipeline(depth, mask, intr, cfg.pipeline);
    GraspPlan plan = res.plan;
    if (cfg.extrinsics_path) plan = plan_to_world(plan, read_extrinsics(*cfg.extrinsics_path));
    if (ply_path) write_ply(*ply_path, res.cloud);

    nlohmann::json out = to_json(plan);
    out["diagnostics"] = {
        {"center_pixel", {res.selection.center_pixel.row, res.selection.center_pixel.col}},
        {"skeleton_center", {res.center.center.row, res.center.center.col}},
        {"clusters", res.center.cluster_count},
        {"raw_cloud_size", res.raw_cloud_size},
        {"cloud_size", res.cloud.size()},
        {"grasp_sigma", res.selection.region_stats.sigma},
    };
    std::cout << out.dump(2) << '\n';
    return 0;
}

SplitFractions parse_splits(const std::string& text) {
    std::vector<double> v;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        try {
            v.push_back(std::stod(item));
        } catch (const std::exception&) {
            throw Error(ErrorCode::InvalidArgument, "bad split fraction '" + item + "'");
        }
    }
    if (v.size() != 3) throw Error(ErrorCode::InvalidArgument, "--splits expects three fractions a,b,c");
    return {v[0], v[1], v[2]};
}

std::pair<std::uint64_t, std::uint64_t> parse_seed_range(const std::string& text) {
    const auto dots = text.find("..");
    try {
        if (dots == std::string::npos) {
            const auto s = std::stoull(text);
            return {s, s};
        }
        const auto a = std::stoull(text.substr(0, dots));
        const auto b = std::stoull(text.substr(dots + 2));
        if (b < a) throw Error(ErrorCode::InvalidArgument, "empty seed range " + text);
        return {a, b};
    } catch (const std::logic_error&) {
        throw Error(ErrorCode::InvalidArgument, "--seeds expects A..B, got '" + text + "'");
    }
}

std::string scene_dir_name(std::uint64_t seed) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "scene_%06llu", static_cast<unsigned long long>(seed));
    return buf;
}

template <typename Fn>
void parallel_for(std::size_t n, unsigned jobs, Fn&& fn) {
    jobs = std::max(1u, std::min<unsigned>(jobs, static_cast<unsigned>(std::max<std::size_t>(n, 1))));
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    std::exception_ptr failure;
    std::mutex failure_mutex;
    for (unsigned t = 0; t < jobs; ++t) {
        pool.emplace_back([&] {
            for (std::size_t i = next++; i < n; i = next++) {
                try {
                    fn(i);
                } catch (...) {
                    std::lock_guard lock(failure_mutex);
                    if (!failure) failure = std::current_exception();
                }
            }
        });
    }
    for (auto& th : pool) th.join();
    if (failure) std::rethrow_exception(failure);
}

void emit_error(ErrorCode code, const std::string& message) {
    std::cerr << nlohmann::json{{"error", to_string(code)}, {"message", message}}.dump() << '\n';
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Collar grasp-pose estimation from depth images and segmentation masks"};
    app.require_subcommand(1);

    // grasp
    auto* grasp = app.add_subcommand("grasp", "Estimate a grasp plan from a depth image and collar mask");
    std::string depth_path, mask_path;
    std::optional<std::string> ply_path;
    Overrides grasp_opts;
    grasp->add_option("--depth", depth_path, "16-bit depth PNG, millimeters")->required();
    grasp->add_option("--mask", mask_path, "8-bit collar mask PNG")->required();
    grasp->add_option("--intrinsics", grasp_opts.intrinsics, "Intrinsics JSON");
    grasp->add_option("--extrinsics", grasp_opts.extrinsics, "Extrinsics JSON; output in world frame");
    grasp->add_option("--ply", ply_path, "Write the preprocessed collar cloud as ASCII PLY");
    add_pipeline_flags(grasp, grasp_opts);

    // label
    auto* label = app.add_subcommand("label", "Label RGB frames and write shuffled dataset manifests");
    std::string label_in, label_out, splits_text = "0.72,0.18,0.10";
    std::uint64_t label_seed = 0;
    bool drop_empty = false;
    std::optional<std::string> test_garments, label_config;
    std::optional<double> h_min, h_max, s_min, v_min;
    label->add_option("--in", label_in, "Directory of frame_%06d_{rgb,depth}.png")->required();
    label->add_option("--out", label_out, "Output directory for masks and manifests")->required();
    label->add_option("--seed", label_seed, "Shuffle seed");
    label->add_option("--splits", splits_text, "Train,val,test fractions");
    label->add_option("--h-min", h_min, "Minimum hue, degrees");
    label->add_option("--h-max", h_max, "Maximum hue, degrees");
    label->add_option("--s-min", s_min, "Minimum saturation");
    label->add_option("--v-min", v_min, "Minimum value");
    label->add_flag("--drop-empty", drop_empty, "Skip frames whose mask is empty");
    label->add_option("--test-garments", test_garments, "Directory of per-garment held-out frame folders");
    label->add_option("--config", label_config, "Key-value config file");

    // eval
    auto* eval = app.add_subcommand("eval", "Score prediction masks against a manifest");
    std::string manifest_path, pred_dir;
    bool macro = false;
    std::string eval_format = "json";
    std::optional<std::string> eval_report;
    eval->add_option("--manifest", manifest_path, "JSON-lines manifest")->required();
    eval->add_option("--pred", pred_dir, "Directory of predicted masks")->required();
    eval->add_flag("--macro", macro, "Average per-image metrics instead of summed counts");
    eval->add_option("--format", eval_format, "Standard output format")->check(CLI::IsMember({"json", "table"}));
    eval->add_option("--report", eval_report, "Also write the JSON report here");

    // synth
    auto* synth = app.add_subcommand("synth", "Synthetic collar scenes");
    synth->require_subcommand(1);
    auto* gen = synth->add_subcommand("gen", "Generate scene bundles");
    std::string seeds_text, gen_out;
    SceneParams scene_params;
    gen->add_option("--seeds", seeds_text, "Seed range A..B (inclusive)")->required();
    gen->add_option("--out", gen_out, "Output directory")->required();
    gen->add_option("--noise", scene_params.noise_std, "Depth noise std, meters");
    gen->add_option("--ridges", scene_params.ridge_count, "Planted ridges per scene");
    gen->add_option("--ridge-height", scene_params.ridge_height, "Ridge height, meters");
    gen->add_option("--ridge-width", scene_params.ridge_width, "Ridge profile std, meters");
    gen->add_option("--base-amplitude", scene_params.base_amplitude, "Base height-field amplitude, meters");
    gen->add_flag("--straight", scene_params.straight, "Straight ridges instead of arcs");

    auto* trial = synth->add_subcommand("trial", "Run grasp trials on scene bundles");
    std::string scenes_dir, report_path;
    unsigned jobs = 1;
    bool oracle = false;
    Overrides trial_opts;
    TrialCriteria criteria;
    trial->add_option("--scenes", scenes_dir, "Directory of scene bundles")->required();
    trial->add_option("--report", report_path, "Report JSON path")->required();
    trial->add_option("--jobs", jobs, "Worker threads");
    trial->add_flag("--oracle", oracle, "Use brute-force candidate and sigma routines");
    trial->add_option("--max-distance", criteria.max_distance, "Success distance to the fold, meters");
    trial->add_option("--max-angle", criteria.max_angle_deg, "Success angle to the fold normal, degrees");
    add_pipeline_flags(trial, trial_opts);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }

    try {
        if (*grasp) return cmd_grasp(depth_path, mask_path, grasp_opts, ply_path);

        if (*label) {
            PipelineConfig cfg;
            if (label_config) apply_config_file(cfg, *label_config);
            DatasetOptions opts;
            opts.seed = label_seed;
            opts.splits = parse_splits(splits_text);
            opts.thresholds = cfg.hsv;
            if (h_min) opts.thresholds.h_min = *h_min;
            if (h_max) opts.thresholds.h_max = *h_max;
            if (s_min) opts.thresholds.s_min = *s_min;
            if (v_min) opts.thresholds.v_min = *v_min;
            opts.drop_empty = drop_empty;
            if (test_garments) opts.test_garments_dir = *test_garments;
            const Dataset ds = build_dataset(label_in, label_out, opts);
            const fs::path out(label_out);
            write_manifest(out / "train.jsonl", ds.train);
            write_manifest(out / "val.jsonl", ds.val);
            write_manifest(out / "test.jsonl", ds.test);
            std::cout << nlohmann::json{{"train", ds.train.entries.size()},
                                        {"val", ds.val.entries.size()},
                                        {"test", ds.test.entries.size()},
                                        {"seed", label_seed}}
                             .dump()
                      << '\n';
            return 0;
        }

        if (*eval) {
            const MetricReport report = evaluate_set(read_manifest(manifest_path), pred_dir,
                                                     macro ? Averaging::Macro : Averaging::Micro);
            const nlohmann::json j = to_json(report);
            if (eval_report) {
                std::ofstream f(*eval_report);
                if (!f) throw Error(ErrorCode::Io, "cannot write " + *eval_report);
                f << j.dump(2) << '\n';
            }
            if (eval_format == "table") {
                std::cout << format_table(report);
            } else {
                std::cout << j.dump(2) << '\n';
            }
            return 0;
        }

        if (*gen) {
            const auto [first, last] = parse_seed_range(seeds_text);
            for (std::uint64_t s = first; s <= last; ++s) {
                save_scene(fs::path(gen_out) / scene_dir_name(s), generate_scene(scene_params, s));
            }
            std::cout << nlohmann::json{{"scenes", last - first + 1}, {"out", gen_out}}.dump() << '\n';
            return 0;
        }

        if (*trial) {
            const PipelineConfig cfg = resolve_config(trial_opts);
            std::vector<fs::path> dirs;
            for (const auto& e : fs::directory_iterator(scenes_dir)) {
                if (e.is_directory() && fs::exists(e.path() / "scene.json")) dirs.push_back(e.path());
            }
            std::sort(dirs.begin(), dirs.end());
            std::vector<TrialResult> results(dirs.size());
            parallel_for(dirs.size(), jobs, [&](std::size_t i) {
                const SyntheticScene scene = load_scene(dirs[i]);
                results[i] = oracle ? run_oracle_trial(scene, cfg.pipeline, criteria)
                                    : run_trial(scene, cfg.pipeline, criteria);
            });
            std::size_t ok = 0;
            std::map<std::string, std::size_t> failures;
            nlohmann::json trials = nlohmann::json::array();
            for (std::size_t i = 0; i < results.size(); ++i) {
                if (results[i].success) ++ok;
                else ++failures[results[i].reason];
                nlohmann::json t = to_json(results[i]);
                t["scene"] = dirs[i].filename().string();
                trials.push_back(t);
            }
            const nlohmann::json report = {
                {"trials", results.size()},
                {"successes", ok},
                {"success_rate", results.empty() ? 0.0 : static_cast<double>(ok) / results.size()},
                {"failures", failures},
                {"criteria", {{"max_distance", criteria.max_distance}, {"max_angle_deg", criteria.max_angle_deg}}},
                {"mode", oracle ? "oracle" : "pipeline"},
                {"results", trials},
            };
            std::ofstream f(report_path);
            if (!f) throw Error(ErrorCode::Io, "cannot write " + report_path);
            f << report.dump(2) << '\n';
            std::cout << nlohmann::json{{"trials", results.size()}, {"successes", ok}}.dump() << '\n';
            return 0;
        }
    } catch (const Error& e) {
        emit_error(e.code(), e.what());
        return exit_code(e.code());
    } catch (const std::exception& e) {
        emit_error(ErrorCode::Io, e.what());
        return 4;
    }
    return 1;
}
