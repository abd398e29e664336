#include "sheetlight/pipeline/commands.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <map>
#include <ostream>
#include <set>

#include <CLI11.hpp>

#include "sheetlight/compose/relight.hpp"
#include "sheetlight/core/error.hpp"
#include "sheetlight/core/parallel.hpp"
#include "sheetlight/eval/image_quality.hpp"
#include "sheetlight/eval/kitti.hpp"
#include "sheetlight/eval/report.hpp"
#include "sheetlight/io/obj.hpp"
#include "sheetlight/io/png.hpp"
#include "sheetlight/io/text.hpp"
#include "sheetlight/pipeline/augment.hpp"
#include "sheetlight/pipeline/dataset.hpp"

namespace sheetlight::pipeline {

namespace {

constexpr int kExitFailure = 1;
constexpr int kExitUsage = 2;

/// Parses `args` into `app`. Returns -1 to continue, else the exit code
/// (0 after --help).
int parse(CLI::App& app, const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return 0;
    } catch (const CLI::ParseError& e) {
        err << app.get_name() << ": " << e.what() << "\n";
        return kExitUsage;
    }
    return -1;
}

bool require_file(const std::string& path, const char* what, std::ostream& err) {
    if (fs::is_regular_file(path)) return true;
    err << "error: " << what << " not found: " << path << "\n";
    return false;
}

void add_geometry_options(CLI::App& app, geom::GeometryParams& g) {
    app.add_option("--d-min", g.d_min, "Inverse-depth floor; values below become the far wall")->capture_default_str();
    app.add_option("--grid-size", g.grid_size, "Lattice size G of the sheet mesh")->capture_default_str();
    app.add_option("--depth-scale", g.depth_scale, "z = depth_scale / inverse depth")->capture_default_str();
    app.add_option("--smooth-iterations", g.smooth_iterations, "Laplacian smoothing iterations")->capture_default_str();
    app.add_option("--smooth-lambda", g.smooth_lambda, "Laplacian smoothing step")->capture_default_str();
    app.add_option("--max-edge-ratio", g.max_edge_depth_ratio, "Drop faces with a larger depth ratio (0 keeps all)")
        ->capture_default_str();
}

std::string timing_summary(const std::vector<compose::StageTiming>& timings) {
    double total = 0.0;
    std::string parts;
    char buf[96];
    for (const auto& t : timings) {
        total += t.milliseconds;
        std::snprintf(buf, sizeof buf, "%s%s %.1f", parts.empty() ? "" : ", ", t.stage.c_str(), t.milliseconds);
        parts += buf;
    }
    std::snprintf(buf, sizeof buf, "%.1f ms (", total);
    return buf + parts + ")";
}

std::vector<std::string> sorted_files(const fs::path& dir, const std::string& ext) {
    std::vector<std::string> names;
    for (const auto& e : fs::directory_iterator(dir)) {
        if (e.is_regular_file() && e.path().extension() == ext) names.push_back(e.path().filename().string());
    }
    std::sort(names.begin(), names.end());
    return names;
}

}  // namespace

int relight_command(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Relight one frame from its image and inverse-depth map", "relight"};
    std::string image_path, depth_path, out_path = "relit.png", src_sun, tgt_sun, sky, dump_dir, refiner;
    double fov = 0.0, depth_png_scale = 8.0;
    bool no_recolor = false, keep_sky_occluders = false, aspect = false;
    int workers = 0;
    geom::GeometryParams geometry;
    compose::RelightParams params;
    app.add_option("--image", image_path, "Input RGB PNG")->required();
    app.add_option("--depth", depth_path, "Inverse depth (.pfm, or 8/16-bit .png)")->required();
    app.add_option("--fov", fov, "Horizontal field of view in degrees")->required();
    app.add_option("--src-sun", src_sun, "Source sun as AZ,EL in degrees")->required();
    app.add_option("--tgt-sun", tgt_sun, "Target sun as AZ,EL in degrees")->required();
    app.add_option("--sky", sky, "Target sky zenith colour #RRGGBB");
    app.add_option("--out", out_path, "Output PNG")->capture_default_str();
    app.add_option("--dump-buffers", dump_dir, "Directory for intermediate buffers");
    app.add_option("--depth-png-scale", depth_png_scale, "Divisor for PNG depth values")->capture_default_str();
    app.add_flag("--no-sky-recolor", no_recolor, "Keep original sky pixels");
    app.add_flag("--keep-sky-occluders", keep_sky_occluders, "Let far-wall faces cast shadows");
    app.add_flag("--aspect-correction", aspect, "Scale the vertical tangent by height/width");
    app.add_option("--penumbra-scale", params.penumbra_scale, "Blur px per unit occluder distance")->capture_default_str();
    app.add_option("--penumbra-max", params.penumbra_max_px, "Maximum blur sigma in px")->capture_default_str();
    app.add_option("--ambient", params.ambient, "Ambient level of both lightings")->capture_default_str();
    app.add_option("--strength", params.strength, "Reshading strength")->capture_default_str();
    app.add_option("--default-k", params.default_k, "Fallback shadow attenuation")->capture_default_str();
    app.add_option("--refiner", refiner, "External refinement command");
    app.add_option("--workers", workers, "Threads (default: SHEETLIGHT_WORKERS or all cores)");
    add_geometry_options(app, geometry);
    if (const int rc = parse(app, args, out, err); rc >= 0) return rc;

    if (!require_file(image_path, "image", err) || !require_file(depth_path, "depth file", err)) return kExitUsage;
    try {
        light::LightingCondition source = light::default_source_lighting();
        light::LightingCondition target = source;
        light::parse_sun(src_sun, source);
        light::parse_sun(tgt_sun, target);
        source.ambient = target.ambient = params.ambient;
        if (!sky.empty()) target.sky_zenith_color = light::parse_hex_color(sky);
        params.recolor_sky = !no_recolor;
        params.exclude_sky_occluders = !keep_sky_occluders;
        params.workers = workers > 0 ? workers : default_worker_count();

        const auto t0 = std::chrono::steady_clock::now();
        RgbImage image = io::read_png_rgb(image_path);
        const geom::InverseDepthMap depth = load_inverse_depth(depth_path, depth_png_scale);
        const geom::CameraModel cam{fov, image.width(), image.height(), aspect};
        std::shared_ptr<const compose::ShadowRefiner> ext;
        if (!refiner.empty()) {
            ext = std::make_shared<compose::ExternalRefiner>(refiner, fs::temp_directory_path() / "sheetlight");
        }
        const compose::FrameRelighter relighter(std::move(image), depth, cam, source, geometry, params, ext);
        compose::FrameResult result = relighter.relight(target);
        io::write_png_rgb(out_path, result.relit);
        if (!dump_dir.empty()) compose::write_buffer_dump(dump_dir, result, 0);
        std::vector<compose::StageTiming> timings = relighter.timings();
        timings.insert(timings.end(), result.timings.begin(), result.timings.end());
        const std::chrono::duration<double, std::milli> wall = std::chrono::steady_clock::now() - t0;
        const auto& k = result.buffers.attenuation.k;
        char head[160];
        std::snprintf(head, sizeof head, "relit %dx%d, k=(%.3f %.3f %.3f)%s, wall %.1f ms, stages ",
                      result.relit.width(), result.relit.height(), k[0], k[1], k[2],
                      result.buffers.attenuation.fallback ? " default" : "", wall.count());
        out << head << timing_summary(timings) << "\n";
    } catch (const IoError& e) {
        err << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kExitFailure;
    }
    return 0;
}

int augment_command(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Relight every frame of the configured sequences", "augment"};
    std::string config_path;
    int workers = -1;
    app.add_option("config", config_path, "JSON configuration file")->required();
    app.add_option("--workers", workers, "Frame workers (overrides config and SHEETLIGHT_WORKERS)");
    if (const int rc = parse(app, args, out, err); rc >= 0) return rc;
    if (!require_file(config_path, "config file", err)) return kExitUsage;

    AugmentConfig config;
    try {
        config = load_augment_config(config_path);
        if (workers >= 0) config.workers = workers;
        config.validate();
    } catch (const std::exception& e) {
        err << "invalid config: " << e.what() << "\n";
        return kExitUsage;
    }
    try {
        const auto t0 = std::chrono::steady_clock::now();
        const AugmentSummary s = run_augment(config, &err);
        const std::chrono::duration<double> wall = std::chrono::steady_clock::now() - t0;
        char line[200];
        std::snprintf(line, sizeof line, "augment: %d sequences, %d frames, %d images, %zu failures, %.2f s\n",
                      s.sequences, s.frames, s.images_written, s.failures.size(), wall.count());
        out << line;
        return s.failures.empty() ? 0 : kExitFailure;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kExitFailure;
    }
}

int mot_eval_command(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"CLEAR-MOT evaluation of KITTI tracking label files", "mot-eval"};
    std::string gt_dir, pred_dir, json_path;
    double iou_min = 0.5;
    std::vector<std::string> classes{"Car"};
    int workers = 0;
    app.add_option("gt_dir", gt_dir, "Directory of ground-truth <sequence>.txt files")->required();
    app.add_option("pred_dir", pred_dir, "Directory of prediction <sequence>.txt files")->required();
    app.add_option("--json", json_path, "Also write the report as JSON");
    app.add_option("--iou", iou_min, "Match threshold")->capture_default_str();
    app.add_option("--classes", classes, "Object types to evaluate")->capture_default_str();
    app.add_option("--workers", workers, "Sequences evaluated in parallel");
    if (const int rc = parse(app, args, out, err); rc >= 0) return rc;
    for (const std::string& d : {gt_dir, pred_dir}) {
        if (!fs::is_directory(d)) {
            err << "error: directory not found: " << d << "\n";
            return kExitUsage;
        }
    }

    const std::vector<std::string> gt_files = sorted_files(gt_dir, ".txt");
    const std::vector<std::string> pred_files = sorted_files(pred_dir, ".txt");
    const std::set<std::string> pred_set(pred_files.begin(), pred_files.end());
    const std::set<std::string> gt_set(gt_files.begin(), gt_files.end());
    std::vector<std::string> names;
    for (const auto& n : gt_files) {
        if (pred_set.count(n)) names.push_back(n);
        else err << "warning: no prediction file for " << n << ", skipped\n";
    }
    for (const auto& n : pred_files) {
        if (!gt_set.count(n)) err << "warning: no ground-truth file for " << n << ", skipped\n";
    }
    if (names.empty()) {
        err << "error: no sequence has both ground truth and predictions\n";
        return kExitFailure;
    }

    try {
        const eval::KittiParseOptions opts{classes};
        std::vector<eval::MotAccumulator> accs(names.size(), eval::MotAccumulator(iou_min));
        parallel_for(
            int(names.size()), workers > 0 ? workers : default_worker_count(),
            [&](int b, int e) {
                for (int i = b; i < e; ++i) {
                    const std::string& n = names[std::size_t(i)];
                    accs[std::size_t(i)].add_sequence(eval::parse_kitti_tracking((fs::path(gt_dir) / n).string(), opts),
                                                      eval::parse_kitti_tracking((fs::path(pred_dir) / n).string(), opts));
                }
            },
            1);
        eval::MotAccumulator total(iou_min);
        std::vector<eval::NamedMotReport> rows;
        for (std::size_t i = 0; i < names.size(); ++i) {
            total.merge(accs[i]);
            const std::string seq = fs::path(names[i]).stem().string();
            if (accs[i].gt_count() == 0) {
                err << "warning: sequence " << seq << " has no ground-truth objects; MOTA undefined\n";
                continue;
            }
            rows.emplace_back(seq, accs[i].report());
        }
        const eval::MotReport aggregate = total.report();
        out << eval::mot_report_table(rows, aggregate);
        if (!json_path.empty()) io::write_text_atomic(json_path, eval::mot_report_json(rows, aggregate));
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kExitFailure;
    }
    return 0;
}

int iq_eval_command(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"RMSE, PSNR and SSIM between reference and test images", "iq-eval"};
    std::string ref, test, json_path;
    app.add_option("reference", ref, "Reference PNG, or a directory of PNGs")->required();
    app.add_option("test", test, "Test PNG, or a directory with matching file names")->required();
    app.add_option("--json", json_path, "Also write the report as JSON");
    if (const int rc = parse(app, args, out, err); rc >= 0) return rc;

    std::vector<std::pair<std::string, std::pair<fs::path, fs::path>>> jobs;
    if (fs::is_directory(ref) && fs::is_directory(test)) {
        for (const auto& n : sorted_files(ref, ".png")) {
            const fs::path t = fs::path(test) / n;
            if (fs::is_regular_file(t)) jobs.push_back({n, {fs::path(ref) / n, t}});
            else err << "warning: " << t.string() << " missing, skipped\n";
        }
        if (jobs.empty()) {
            err << "error: no matching image pairs\n";
            return kExitFailure;
        }
    } else {
        if (!require_file(ref, "reference image", err) || !require_file(test, "test image", err)) return kExitUsage;
        jobs.push_back({fs::path(test).filename().string(), {ref, test}});
    }
    try {
        std::vector<eval::NamedIqReport> rows;
        for (const auto& [name, paths] : jobs) {
            rows.emplace_back(name, eval::image_quality(eval::load_iq_image(paths.first.string()),
                                                        eval::load_iq_image(paths.second.string())));
        }
        out << eval::iq_report_table(rows);
        if (!json_path.empty()) io::write_text_atomic(json_path, eval::iq_report_json(rows));
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kExitFailure;
    }
    return 0;
}

int mesh_dump_command(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Write the sheet mesh of one depth map as OBJ", "mesh-dump"};
    std::string depth_path, out_path = "sheet.obj";
    double fov = 0.0, depth_png_scale = 8.0;
    bool aspect = false;
    geom::GeometryParams geometry;
    app.add_option("--depth", depth_path, "Inverse depth (.pfm, or 8/16-bit .png)")->required();
    app.add_option("--fov", fov, "Horizontal field of view in degrees")->required();
    app.add_option("--out", out_path, "Output OBJ")->capture_default_str();
    app.add_option("--depth-png-scale", depth_png_scale, "Divisor for PNG depth values")->capture_default_str();
    app.add_flag("--aspect-correction", aspect, "Scale the vertical tangent by height/width");
    add_geometry_options(app, geometry);
    if (const int rc = parse(app, args, out, err); rc >= 0) return rc;
    if (!require_file(depth_path, "depth file", err)) return kExitUsage;
    try {
        geometry.validate();
        const geom::InverseDepthMap depth = load_inverse_depth(depth_path, depth_png_scale);
        const geom::CameraModel cam{fov, depth.width(), depth.height(), aspect};
        cam.validate();
        const geom::SceneSheet sheet = geom::build_scene_sheet(depth, cam, geometry);
        io::write_obj(out_path, sheet.mesh);
        std::size_t sky_faces = 0;
        for (std::size_t f = 0; f < sheet.mesh.faces.size(); ++f) sky_faces += sheet.mesh.is_sky_face(f);
        out << "mesh-dump: " << sheet.mesh.vertices.size() << " vertices, " << sheet.mesh.faces.size() << " faces ("
            << sky_faces << " sky) -> " << out_path << "\n";
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kExitFailure;
    }
    return 0;
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    static const std::map<std::string, int (*)(const std::vector<std::string>&, std::ostream&, std::ostream&)>
        commands{{"relight", relight_command},
                 {"augment", augment_command},
                 {"mot-eval", mot_eval_command},
                 {"iq-eval", iq_eval_command},
                 {"mesh-dump", mesh_dump_command}};
    auto usage = [&](std::ostream& s) {
        s << "usage: sheetlight <command> [options]\n\ncommands:\n"
             "  relight    relight one frame\n"
             "  augment    batch augmentation from a JSON config\n"
             "  mot-eval   CLEAR-MOT metrics for KITTI tracking labels\n"
             "  iq-eval    RMSE / PSNR / SSIM between images\n"
             "  mesh-dump  write the sheet mesh of a depth map as OBJ\n\n"
             "Run `sheetlight <command> --help` for options.\n";
    };
    if (args.empty()) {
        usage(err);
        return kExitUsage;
    }
    if (args[0] == "-h" || args[0] == "--help") {
        usage(out);
        return 0;
    }
    const auto it = commands.find(args[0]);
    if (it == commands.end()) {
        err << "unknown command '" << args[0] << "'\n";
        usage(err);
        return kExitUsage;
    }
    return it->second(std::vector<std::string>(args.begin() + 1, args.end()), out, err);
}

}  // namespace sheetlight::pipeline
