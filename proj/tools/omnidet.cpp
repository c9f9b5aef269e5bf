// omnidet: fisheye-to-perspective view synthesis, detection back-projection,
// NMS-family fusion and PR/AP evaluation.
//
// Exit codes: 0 success, 1 internal failure, 2 usage or config error.

#include <omp.h>

#include <cstdio>
#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "json.hpp"
#include "omnidet/config.hpp"
#include "omnidet/pipeline.hpp"

using namespace omnidet;
namespace fs = std::filesystem;

namespace {

struct GridFlags {
    double azimuth_start, azimuth_end, azimuth_step;
    double elevation_start, elevation_end, elevation_step;
    double view_fx, view_fy, view_cx, view_cy;

    GridFlags() {
        const ViewGridSpec d = pipeline::default_view_grid();
        azimuth_start = d.azimuth_start;
        azimuth_end = d.azimuth_end;
        azimuth_step = d.azimuth_step;
        elevation_start = d.elevation_start;
        elevation_end = d.elevation_end;
        elevation_step = d.elevation_step;
        view_fx = d.intrinsics.fx;
        view_fy = d.intrinsics.fy;
        view_cx = d.intrinsics.cx;
        view_cy = d.intrinsics.cy;
    }

    ViewGridSpec to_spec() const {
        ViewGridSpec spec;
        spec.azimuth_start = azimuth_start;
        spec.azimuth_end = azimuth_end;
        spec.azimuth_step = azimuth_step;
        spec.elevation_start = elevation_start;
        spec.elevation_end = elevation_end;
        spec.elevation_step = elevation_step;
        spec.intrinsics = {view_fx, view_fy, 0.0, view_cx, view_cy};
        return spec;
    }

    void attach(CLI::App* cmd) {
        cmd->add_option("--azimuth-start", azimuth_start, "Grid azimuth start, radians");
        cmd->add_option("--azimuth-end", azimuth_end, "Grid azimuth end, radians");
        cmd->add_option("--azimuth-step", azimuth_step, "Grid azimuth step, radians");
        cmd->add_option("--elevation-start", elevation_start, "Grid elevation start, radians");
        cmd->add_option("--elevation-end", elevation_end, "Grid elevation end, radians");
        cmd->add_option("--elevation-step", elevation_step, "Grid elevation step, radians");
        cmd->add_option("--view-fx", view_fx, "Virtual view focal length x, pixels");
        cmd->add_option("--view-fy", view_fy, "Virtual view focal length y, pixels");
        cmd->add_option("--view-cx", view_cx, "Virtual view principal point x (width = 2*cx)");
        cmd->add_option("--view-cy", view_cy, "Virtual view principal point y (height = 2*cy)");
    }
};

struct FusionFlags {
    std::string variant = "nms";
    double nt = 0.5;
    double sigma = 0.5;
    double ct = 0.0;

    FusionParams to_params() const {
        FusionParams params;
        params.variant = fusion_variant_from_string(variant);
        params.overlap_threshold = nt;
        params.sigma = sigma;
        params.confidence_threshold = ct;
        return params;
    }

    void attach(CLI::App* cmd) {
        cmd->add_option("--variant", variant, "Fusion variant: nms | soft_linear | soft_gaussian")
            ->check(CLI::IsMember({"nms", "soft_linear", "soft_gaussian"}));
        cmd->add_option("--nt", nt, "Overlap threshold N_t")->check(CLI::Range(0.0, 1.0));
        cmd->add_option("--sigma", sigma, "Gaussian smoothing factor sigma");
        cmd->add_option("--ct", ct, "Confidence threshold C_t")->check(CLI::Range(0.0, 1.0));
    }
};

void attach_threads(CLI::App* cmd, int& threads) {
    cmd->add_option("--threads", threads, "Worker threads (0 = library default)");
}

void attach_config(CLI::App* cmd, std::string& path) {
    cmd->add_option("--config", path,
                    "Key=value config file; keys are long option names, flags take precedence");
}

/// Applies config entries to options the command line left untouched.
void apply_config(CLI::App* cmd, const std::string& path) {
    if (path.empty()) return;
    const KeyValueFile kv = KeyValueFile::load(path);
    for (const auto& entry : kv.entries()) {
        CLI::Option* opt = cmd->get_option_no_throw("--" + entry.key);
        if (!opt || entry.key == "config") {
            throw ConfigError(kv.source() + ":" + std::to_string(entry.line) +
                              ": unknown option '" + entry.key + "' for subcommand '" +
                              cmd->get_name() + "'");
        }
        if (opt->count() > 0) continue;
        try {
            opt->add_result(entry.value);
            opt->run_callback();
        } catch (const CLI::Error& err) {
            throw ConfigError(kv.source() + ":" + std::to_string(entry.line) + ": " + err.what());
        }
    }
}

void apply_threads(int threads) {
    if (threads > 0) omp_set_num_threads(threads);
}

FisheyeCamera load_camera_or_default(const std::string& path) {
    return path.empty() ? pipeline::default_omni_camera() : load_fisheye_camera(path);
}

BackprojectMode mode_from_string(const std::string& name) {
    if (name == "corners") return BackprojectMode::corners;
    if (name == "edge-sampled") return BackprojectMode::edge_sampled;
    throw ConfigError("unknown back-projection mode '" + name + "'");
}

std::string format_param(const char* prefix, double v) {
    char buf[48];
    std::snprintf(buf, sizeof(buf), "_%s%.2f", prefix, v);
    return buf;
}

void print_ap_rows(const std::vector<ApResult>& rows) {
    std::printf("%-16s %-10s %5s %8s\n", "method", "class", "O_t", "AP");
    for (const auto& row : rows) {
        std::printf("%-16s %-10s %5.2f %8.4f\n", row.method.c_str(), row.class_label.c_str(),
                    row.overlap_threshold, row.ap);
    }
}

void write_report_csvs(const BenchmarkReport& report, const fs::path& out_dir) {
    fs::create_directories(out_dir);
    for (std::size_t i = 0; i < report.rows.size(); ++i) {
        const auto& row = report.rows[i];
        std::ofstream pr_out(out_dir / ("pr_" + row.method + "_" + row.class_label + ".csv"),
                             std::ios::binary);
        write_pr_csv(report.curves[i], pr_out);
    }
    std::ofstream ap_out(out_dir / "ap.csv", std::ios::binary);
    write_ap_csv(report.rows, ap_out, report.partial);
    for (const auto& error : report.errors) std::cerr << "warning: " << error << "\n";
}

// ---------------------------------------------------------------- subcommands

int run_views(const std::string& camera_path, const std::string& image_path,
              const std::string& out_dir, const GridFlags& grid, bool write_luts,
              const std::string& interp) {
    const FisheyeCamera omni = load_camera_or_default(camera_path);
    const Image omni_image = read_image(image_path);
    const auto views = enumerate_views(grid.to_spec());
    pipeline::ViewsOptions options;
    options.out_dir = out_dir;
    options.write_luts = write_luts;
    options.interpolation =
        interp == "nearest" ? Interpolation::nearest : Interpolation::bilinear;
    const auto summary = pipeline::render_views(omni_image, omni, views, options);
    std::cout << "wrote " << summary.view_count << " views to " << out_dir << "\n";
    return 0;
}

int run_backproject(const std::string& camera_path, const std::string& detections_path,
                    const std::string& out_path, const GridFlags& grid, const std::string& mode,
                    int edge_samples) {
    const FisheyeCamera omni = load_camera_or_default(camera_path);
    const auto views = enumerate_views(grid.to_spec());
    std::ifstream in(detections_path);
    if (!in) throw ConfigError("cannot open detection file: " + detections_path);
    const auto parsed = parse_detections(in, detections_path);
    std::vector<Detection> pooled;
    const auto summary = pipeline::backproject_detections(
        parsed, detections_path, views, omni, mode_from_string(mode), edge_samples, pooled);
    write_detections(pooled, fs::path(out_path));
    std::cerr << "back-projected " << summary.kept << " boxes, dropped " << summary.dropped
              << " outside the field of view\n";
    return 0;
}

int run_fuse(const std::string& in_path, const std::string& out_path, const FusionFlags& fusion,
             std::vector<double> sweep_nt, std::vector<double> sweep_sigma,
             std::vector<double> sweep_ct) {
    const auto detections = read_detections(in_path);
    const bool sweeping = !sweep_nt.empty() || !sweep_sigma.empty() || !sweep_ct.empty();
    if (!sweeping) {
        write_detections(fuse(detections, fusion.to_params()), fs::path(out_path));
        return 0;
    }

    const FusionParams base = fusion.to_params();
    if (sweep_ct.empty()) sweep_ct.push_back(base.confidence_threshold);
    const bool uses_sigma = base.variant == FusionVariant::soft_gaussian;
    if (uses_sigma && !sweep_nt.empty()) {
        throw ConfigError("--sweep-nt applies to nms and soft_linear, not soft_gaussian");
    }
    if (!uses_sigma && !sweep_sigma.empty()) {
        throw ConfigError("--sweep-sigma requires --variant soft_gaussian");
    }
    std::vector<double>& primary = uses_sigma ? sweep_sigma : sweep_nt;
    if (primary.empty()) {
        primary.push_back(uses_sigma ? base.sigma : base.overlap_threshold);
    }

    const fs::path out(out_path);
    const fs::path dir = out.parent_path();
    const std::string stem = out.stem().string();
    const std::string extension = out.extension().string();
    if (!dir.empty()) fs::create_directories(dir);
    int written = 0;
    for (const double value : primary) {
        for (const double ct : sweep_ct) {
            FusionParams params = base;
            params.confidence_threshold = ct;
            std::string name = stem + "_" + to_string(params.variant);
            if (uses_sigma) {
                params.sigma = value;
                name += format_param("sigma", value);
            } else {
                params.overlap_threshold = value;
                name += format_param("nt", value);
            }
            name += format_param("ct", ct);
            write_detections(fuse(detections, params), dir / (name + extension));
            ++written;
        }
    }
    std::cout << "wrote " << written << " fused files\n";
    return 0;
}

int run_eval(const std::vector<std::string>& method_specs, const std::string& table_manifest,
             const std::string& omni_manifest, const FusionFlags& fusion, double ot,
             const std::string& out_dir) {
    BenchmarkReport combined;
    auto merge = [&](BenchmarkReport&& report) {
        combined.partial = combined.partial || report.partial;
        for (auto& r : report.rows) combined.rows.push_back(std::move(r));
        for (auto& c : report.curves) combined.curves.push_back(std::move(c));
        for (auto& e : report.errors) combined.errors.push_back(std::move(e));
    };

    for (const auto& spec : method_specs) {
        const auto eq = spec.find('=');
        if (eq == std::string::npos) {
            throw ConfigError("--method expects tag=manifest, got '" + spec + "'");
        }
        const std::string tag = spec.substr(0, eq);
        const auto entries = read_manifest(spec.substr(eq + 1));
        merge(run_benchmark(entries, {{tag, FusionParams{}, false}}, ot));
    }
    if (!table_manifest.empty()) {
        const auto entries = read_manifest(table_manifest);
        merge(run_benchmark(entries,
                            pipeline::table_methods(fusion.nt, fusion.sigma, fusion.ct), ot));
    }
    if (!omni_manifest.empty()) {
        const auto entries = read_manifest(omni_manifest);
        FusionParams params;
        params.variant = FusionVariant::nms;
        params.overlap_threshold = fusion.nt;
        params.confidence_threshold = fusion.ct;
        merge(run_benchmark(entries, {{"omni", params, true}}, ot));
    }
    if (combined.rows.empty()) {
        throw ConfigError("nothing to evaluate: pass --method tag=manifest, --table or --omni");
    }
    write_report_csvs(combined, out_dir);
    print_ap_rows(combined.rows);
    return combined.partial ? 1 : 0;
}

int run_synth(const std::string& out_dir, std::uint64_t seed, int scenes,
              const std::string& camera_path, const std::string& scene_path,
              const GridFlags& grid, const std::string& noise_name, bool masks,
              const std::string& mode, int edge_samples) {
    pipeline::SyntheticOptions options;
    options.omni = load_camera_or_default(camera_path);
    options.grid = grid.to_spec();
    options.seed = seed;
    options.scene_count = scenes;
    options.mode = mode_from_string(mode);
    options.edge_samples = edge_samples;
    if (noise_name == "zero") {
        options.view_noise = NoiseModel::zero();
    } else if (noise_name == "default") {
        options.view_noise = NoiseModel::defaults();
    } else {
        throw ConfigError("unknown noise profile '" + noise_name + "'");
    }

    fs::create_directories(out_dir);
    if (!scene_path.empty()) {
        // single explicit scene from a config file
        const SyntheticScene scene = load_scene(scene_path);
        const auto views = enumerate_views(options.grid);
        write_ground_truth(render_gt(scene), fs::path(out_dir) / "scene.gt.txt");
        const auto per_view = synth_detections(scene, views, options.view_noise);
        std::vector<Detection> raw;
        std::vector<Detection> pooled;
        for (const auto& vd : per_view) {
            raw.insert(raw.end(), vd.detections.begin(), vd.detections.end());
            for (const auto& det : vd.detections) {
                for (const auto& view : views) {
                    if (view.view_id != vd.view_id) continue;
                    const auto result =
                        backproject_box(det.box, view, scene.omni, options.mode, options.edge_samples);
                    if (result) {
                        pooled.push_back({*result.box, det.score, det.class_label, "omni"});
                    }
                    break;
                }
            }
        }
        write_detections(raw, fs::path(out_dir) / "scene.views.det");
        write_detections(pooled, fs::path(out_dir) / "scene.pooled.det");
        write_detections(synth_omni_detections(scene, options.omni_noise),
                         fs::path(out_dir) / "scene.omni.det");
        if (masks) write_image(render_mask(scene), fs::path(out_dir) / "scene.mask.pgm");
        std::cout << "wrote scene files to " << out_dir << "\n";
        return 0;
    }

    // random scenes; reuse the pipeline writer but skip evaluation
    const auto dataset = pipeline::generate_synthetic_dataset(options);
    std::string pooled_manifest, omni_manifest;
    for (int i = 0; i < options.scene_count; ++i) {
        char name[32];
        std::snprintf(name, sizeof(name), "scene_%03d", i);
        write_ground_truth(dataset.pooled[i].ground_truth,
                           fs::path(out_dir) / (std::string(name) + ".gt.txt"));
        std::vector<Detection> raw;
        for (const auto& vd : dataset.raw_views[i]) {
            raw.insert(raw.end(), vd.detections.begin(), vd.detections.end());
        }
        write_detections(raw, fs::path(out_dir) / (std::string(name) + ".views.det"));
        write_detections(dataset.pooled[i].detections,
                         fs::path(out_dir) / (std::string(name) + ".pooled.det"));
        write_detections(dataset.omni[i].detections,
                         fs::path(out_dir) / (std::string(name) + ".omni.det"));
        if (masks) {
            write_image(render_mask(dataset.scenes[i]),
                        fs::path(out_dir) / (std::string(name) + ".mask.pgm"));
        }
        pooled_manifest += std::string(name) + " " + name + ".pooled.det " + name + ".gt.txt\n";
        omni_manifest += std::string(name) + " " + name + ".omni.det " + name + ".gt.txt\n";
    }
    std::ofstream(fs::path(out_dir) / "pooled.manifest", std::ios::binary) << pooled_manifest;
    std::ofstream(fs::path(out_dir) / "omni.manifest", std::ios::binary) << omni_manifest;
    std::cout << "wrote " << scenes << " scenes to " << out_dir << "\n";
    return 0;
}

int run_pipeline(bool synthetic, const std::string& manifest_path,
                 const std::string& omni_manifest_path, const std::string& camera_path,
                 const std::string& out_dir, const GridFlags& grid, const FusionFlags& fusion,
                 double ot, std::uint64_t seed, int scenes, bool masks, const std::string& mode,
                 int edge_samples) {
    if (synthetic) {
        pipeline::SyntheticOptions options;
        options.omni = load_camera_or_default(camera_path);
        options.grid = grid.to_spec();
        options.seed = seed;
        options.scene_count = scenes;
        options.mode = mode_from_string(mode);
        options.edge_samples = edge_samples;
        options.overlap_threshold = ot;
        const auto methods = pipeline::table_methods(fusion.nt, fusion.sigma, fusion.ct);
        FusionParams omni_params;
        omni_params.variant = FusionVariant::nms;
        omni_params.overlap_threshold = fusion.nt;
        omni_params.confidence_threshold = fusion.ct;
        const auto result = pipeline::run_synthetic_pipeline(
            options, methods, {{"omni", omni_params, true}}, out_dir, masks);
        print_ap_rows(result.report.rows);
        std::cout << "AP table: " << result.ap_csv_path.string() << "\n";
        return 0;
    }

    if (manifest_path.empty()) {
        throw ConfigError(
            "real-data mode needs --manifest FILE with lines `image_id per_view_detections gt`; "
            "per-view detection files use `view_id class score x_min y_min x_max y_max` and the "
            "ground truth `omni class x_min y_min x_max y_max`");
    }
    const FisheyeCamera omni = load_camera_or_default(camera_path);
    const auto views = enumerate_views(grid.to_spec());
    const auto entries = read_manifest(manifest_path);
    if (entries.empty()) throw ConfigError("manifest lists no images: " + manifest_path);

    fs::create_directories(out_dir);
    std::vector<EvalSample> pooled(entries.size());
    int dropped_total = 0;
    for (std::size_t i = 0; i < entries.size(); ++i) {
        std::ifstream in(entries[i].detections_path);
        if (!in) {
            throw ConfigError("missing per-view detection file: " +
                              entries[i].detections_path.string() + " (listed in " + manifest_path +
                              ")");
        }
        const auto parsed = parse_detections(in, entries[i].detections_path.string());
        const auto summary = pipeline::backproject_detections(
            parsed, entries[i].detections_path.string(), views, omni, mode_from_string(mode),
            edge_samples, pooled[i].detections);
        dropped_total += summary.dropped;
        pooled[i].ground_truth = read_ground_truth(entries[i].gt_path);
        write_detections(pooled[i].detections,
                         fs::path(out_dir) / (entries[i].image_id + ".pooled.det"));
    }
    if (dropped_total > 0) {
        std::cerr << "dropped " << dropped_total << " boxes outside the field of view\n";
    }

    BenchmarkReport report;
    for (const auto& method : pipeline::table_methods(fusion.nt, fusion.sigma, fusion.ct)) {
        std::vector<EvalSample> fused(pooled.size());
        for (std::size_t i = 0; i < pooled.size(); ++i) {
            fused[i].ground_truth = pooled[i].ground_truth;
            fused[i].detections = fuse(pooled[i].detections, method.params);
        }
        PrCurve curve = pr_curve(fused, ot, "person");
        report.rows.push_back(average_precision(curve, method.tag));
        report.curves.push_back(std::move(curve));
    }
    if (!omni_manifest_path.empty()) {
        const auto omni_entries = read_manifest(omni_manifest_path);
        FusionParams params;
        params.variant = FusionVariant::nms;
        params.overlap_threshold = fusion.nt;
        params.confidence_threshold = fusion.ct;
        auto omni_report = run_benchmark(omni_entries, {{"omni", params, true}}, ot);
        report.partial = report.partial || omni_report.partial;
        for (auto& r : omni_report.rows) report.rows.push_back(std::move(r));
        for (auto& c : omni_report.curves) report.curves.push_back(std::move(c));
        for (auto& e : omni_report.errors) report.errors.push_back(std::move(e));
    }
    write_report_csvs(report, out_dir);
    print_ap_rows(report.rows);
    return report.partial ? 1 : 0;
}

int run_convert(const std::string& in_path, const std::string& out_path) {
    std::ifstream in(in_path);
    if (!in) throw ConfigError("cannot open JSON detections: " + in_path);
    nlohmann::json doc;
    try {
        in >> doc;
    } catch (const nlohmann::json::exception& err) {
        throw ParseError(in_path + ": " + err.what());
    }
    if (!doc.is_array()) throw ParseError(in_path + ": expected a top-level JSON array");

    std::vector<Detection> detections;
    for (std::size_t i = 0; i < doc.size(); ++i) {
        const auto& item = doc[i];
        const std::string where = in_path + ": entry " + std::to_string(i);
        try {
            Detection det;
            if (item.contains("view_id")) {
                det.view_id = item.at("view_id").get<std::string>();
            } else if (item.contains("image_id")) {
                det.view_id = item.at("image_id").get<std::string>();
            } else {
                throw ParseError(where + ": needs view_id or image_id");
            }
            det.class_label = item.at("class").get<std::string>();
            det.score = item.at("score").get<double>();
            const auto& box = item.at("box");
            if (!box.is_array() || box.size() != 4) {
                throw ParseError(where + ": box must be [x_min, y_min, x_max, y_max]");
            }
            det.box = {box[0].get<double>(), box[1].get<double>(), box[2].get<double>(),
                       box[3].get<double>()};
            if (!det.box.valid() || det.score < 0.0 || det.score > 1.0) {
                throw ParseError(where + ": invalid box or score");
            }
            detections.push_back(std::move(det));
        } catch (const nlohmann::json::exception& err) {
            throw ParseError(where + ": " + err.what());
        }
    }
    write_detections(detections, fs::path(out_path));
    std::cout << "converted " << detections.size() << " detections\n";
    return 0;
}

int run_lut_export(const std::string& camera_path, double azimuth, double elevation,
                   const PinholeIntrinsics& intrinsics, const std::string& out_path) {
    const FisheyeCamera omni = load_camera_or_default(camera_path);
    const auto view = make_virtual_view(azimuth, elevation, intrinsics);
    save_lut(build_lut(view, omni), out_path);
    std::cout << "wrote " << out_path << " for view " << view.view_id << "\n";
    return 0;
}

int run_lut_inspect(const std::string& in_path) {
    const LookupTable lut = load_lut(in_path);
    double min_x = 0.0, min_y = 0.0, max_x = 0.0, max_y = 0.0;
    bool first = true;
    for (std::size_t i = 0; i < lut.valid.size(); ++i) {
        if (!lut.valid[i]) continue;
        if (first) {
            min_x = max_x = lut.src_x[i];
            min_y = max_y = lut.src_y[i];
            first = false;
        } else {
            min_x = std::min(min_x, lut.src_x[i]);
            max_x = std::max(max_x, lut.src_x[i]);
            min_y = std::min(min_y, lut.src_y[i]);
            max_y = std::max(max_y, lut.src_y[i]);
        }
    }
    const std::size_t total = lut.valid.size();
    const std::size_t valid = lut.valid_count();
    std::printf("size: %dx%d\nvalid: %zu/%zu (%.1f%%)\n", lut.width, lut.height, valid, total,
                total ? 100.0 * static_cast<double>(valid) / static_cast<double>(total) : 0.0);
    if (!first) {
        std::printf("source bounds: x [%.2f, %.2f], y [%.2f, %.2f]\n", min_x, max_x, min_y, max_y);
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Omnidirectional detection toolkit: virtual views, box back-projection, "
                 "NMS-family fusion and PR/AP evaluation"};
    app.require_subcommand(1);
    int threads = 0;

    // views
    auto* views_cmd = app.add_subcommand("views", "Render the virtual perspective view grid");
    std::string views_camera, views_image, views_out = "views";
    bool views_luts = false;
    std::string views_interp = "bilinear";
    GridFlags views_grid;
    views_cmd->add_option("--camera", views_camera, "Fisheye camera config (default: built-in 600x600)");
    views_cmd->add_option("--image", views_image, "Omnidirectional image (PGM/PPM)")->required();
    views_cmd->add_option("--out", views_out, "Output directory");
    views_cmd->add_flag("--luts", views_luts, "Also write one .olut file per view");
    views_cmd->add_option("--interp", views_interp, "Interpolation: bilinear | nearest")
        ->check(CLI::IsMember({"bilinear", "nearest"}));
    views_grid.attach(views_cmd);
    attach_threads(views_cmd, threads);
    std::string views_config;
    attach_config(views_cmd, views_config);

    // backproject
    auto* bp_cmd = app.add_subcommand("backproject", "Back-project per-view detections to the omni frame");
    std::string bp_camera, bp_in, bp_out = "pooled.det", bp_mode = "corners";
    int bp_edge_samples = 8;
    GridFlags bp_grid;
    bp_cmd->add_option("--camera", bp_camera, "Fisheye camera config");
    bp_cmd->add_option("--detections", bp_in, "Per-view detection file")->required();
    bp_cmd->add_option("--out", bp_out, "Pooled output file");
    bp_cmd->add_option("--mode", bp_mode, "corners | edge-sampled")
        ->check(CLI::IsMember({"corners", "edge-sampled"}));
    bp_cmd->add_option("--edge-samples", bp_edge_samples, "Samples per box edge in edge-sampled mode");
    bp_grid.attach(bp_cmd);
    std::string bp_config;
    attach_config(bp_cmd, bp_config);

    // fuse
    auto* fuse_cmd = app.add_subcommand("fuse", "Fuse pooled detections with an NMS variant");
    std::string fuse_in, fuse_out = "fused.det";
    FusionFlags fuse_flags;
    std::vector<double> sweep_nt, sweep_sigma, sweep_ct;
    fuse_cmd->add_option("--in", fuse_in, "Pooled detection file")->required();
    fuse_cmd->add_option("--out", fuse_out, "Fused output file (sweeps derive names from it)");
    fuse_flags.attach(fuse_cmd);
    fuse_cmd->add_option("--sweep-nt", sweep_nt, "Comma list of N_t values to sweep")
        ->delimiter(',');
    fuse_cmd->add_option("--sweep-sigma", sweep_sigma, "Comma list of sigma values to sweep")
        ->delimiter(',');
    fuse_cmd->add_option("--sweep-ct", sweep_ct, "Comma list of C_t values to sweep")
        ->delimiter(',');
    std::string fuse_config;
    attach_config(fuse_cmd, fuse_config);

    // eval
    auto* eval_cmd = app.add_subcommand("eval", "Evaluate detections against ground truth");
    std::vector<std::string> eval_methods;
    std::string eval_table, eval_omni, eval_out = "eval";
    FusionFlags eval_fusion;
    double eval_ot = 0.5;
    eval_cmd->add_option("--method", eval_methods,
                         "tag=manifest of already-fused detections (repeatable)");
    eval_cmd->add_option("--table", eval_table,
                         "Manifest of raw pooled detections; runs the nms / soft_gaussian / "
                         "soft_linear comparison");
    eval_cmd->add_option("--omni", eval_omni,
                         "Manifest of direct omnidirectional detections (classic-NMS baseline row)");
    eval_cmd->add_option("--ot", eval_ot, "Evaluation overlap threshold O_t")
        ->check(CLI::Range(0.0, 1.0));
    eval_cmd->add_option("--out", eval_out, "Output directory for PR/AP CSV files");
    eval_fusion.attach(eval_cmd);
    attach_threads(eval_cmd, threads);
    std::string eval_config;
    attach_config(eval_cmd, eval_config);

    // pipeline
    auto* pipe_cmd = app.add_subcommand("pipeline", "Run the full pipeline end to end");
    bool pipe_synthetic = false, pipe_masks = false;
    std::string pipe_manifest, pipe_omni_manifest, pipe_camera, pipe_out = "pipeline_out";
    std::string pipe_mode = "corners";
    GridFlags pipe_grid;
    FusionFlags pipe_fusion;
    double pipe_ot = 0.5;
    std::uint64_t pipe_seed = 0;
    int pipe_scenes = 20, pipe_edge_samples = 8;
    pipe_cmd->add_flag("--synthetic", pipe_synthetic, "Generate detections with the synthetic harness");
    pipe_cmd->add_option("--manifest", pipe_manifest,
                         "Real-data manifest: `image_id per_view_detections gt` per line");
    pipe_cmd->add_option("--omni-manifest", pipe_omni_manifest,
                         "Manifest of direct omnidirectional detections for the baseline row");
    pipe_cmd->add_option("--camera", pipe_camera, "Fisheye camera config");
    pipe_cmd->add_option("--out", pipe_out, "Output directory");
    pipe_cmd->add_option("--ot", pipe_ot, "Evaluation overlap threshold O_t");
    pipe_cmd->add_option("--seed", pipe_seed, "Synthetic master seed");
    pipe_cmd->add_option("--scenes", pipe_scenes, "Synthetic scene count");
    pipe_cmd->add_flag("--masks", pipe_masks, "Write synthetic mask images");
    pipe_cmd->add_option("--mode", pipe_mode, "corners | edge-sampled")
        ->check(CLI::IsMember({"corners", "edge-sampled"}));
    pipe_cmd->add_option("--edge-samples", pipe_edge_samples, "Samples per box edge");
    pipe_grid.attach(pipe_cmd);
    pipe_fusion.attach(pipe_cmd);
    attach_threads(pipe_cmd, threads);
    std::string pipe_config;
    attach_config(pipe_cmd, pipe_config);

    // synth
    auto* synth_cmd = app.add_subcommand("synth", "Generate synthetic detection data only");
    std::string synth_out = "synth_out", synth_camera, synth_scene, synth_noise = "default";
    std::string synth_mode = "corners";
    std::uint64_t synth_seed = 0;
    int synth_scenes = 20, synth_edge_samples = 8;
    bool synth_masks = false;
    GridFlags synth_grid;
    synth_cmd->add_option("--out", synth_out, "Output directory");
    synth_cmd->add_option("--seed", synth_seed, "Master seed");
    synth_cmd->add_option("--scenes", synth_scenes, "Scene count");
    synth_cmd->add_option("--camera", synth_camera, "Fisheye camera config");
    synth_cmd->add_option("--scene", synth_scene, "Explicit scene config (ignores --seed/--scenes)");
    synth_cmd->add_option("--noise", synth_noise, "Noise profile: default | zero")
        ->check(CLI::IsMember({"default", "zero"}));
    synth_cmd->add_flag("--masks", synth_masks, "Write mask images");
    synth_cmd->add_option("--mode", synth_mode, "corners | edge-sampled")
        ->check(CLI::IsMember({"corners", "edge-sampled"}));
    synth_cmd->add_option("--edge-samples", synth_edge_samples, "Samples per box edge");
    synth_grid.attach(synth_cmd);
    std::string synth_config;
    attach_config(synth_cmd, synth_config);

    // convert-detections
    auto* conv_cmd = app.add_subcommand("convert-detections",
                                        "Convert detector JSON output to the detection line format");
    std::string conv_in, conv_out = "detections.det";
    conv_cmd->add_option("--in", conv_in, "JSON array of {view_id, class, score, box}")->required();
    conv_cmd->add_option("--out", conv_out, "Output detection file");

    // lut
    auto* lut_cmd = app.add_subcommand("lut", "Export or inspect remap lookup tables");
    lut_cmd->require_subcommand(1);
    auto* lut_export_cmd = lut_cmd->add_subcommand("export", "Build and write a view LUT");
    std::string lute_camera, lute_out = "view.olut";
    double lute_azimuth = 0.0, lute_elevation = 0.0;
    PinholeIntrinsics lute_intrinsics{100.0, 100.0, 0.0, 100.0, 100.0};
    lut_export_cmd->add_option("--camera", lute_camera, "Fisheye camera config");
    lut_export_cmd->add_option("--azimuth", lute_azimuth, "View azimuth, radians");
    lut_export_cmd->add_option("--elevation", lute_elevation, "View elevation, radians");
    lut_export_cmd->add_option("--out", lute_out, "Output .olut path");
    lut_export_cmd->add_option("--view-fx", lute_intrinsics.fx, "View focal length x, pixels");
    lut_export_cmd->add_option("--view-fy", lute_intrinsics.fy, "View focal length y, pixels");
    lut_export_cmd->add_option("--view-cx", lute_intrinsics.cx, "View principal point x (width = 2*cx)");
    lut_export_cmd->add_option("--view-cy", lute_intrinsics.cy, "View principal point y (height = 2*cy)");
    auto* lut_inspect_cmd = lut_cmd->add_subcommand("inspect", "Print LUT header and statistics");
    std::string luti_in;
    lut_inspect_cmd->add_option("--in", luti_in, "LUT file")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (*views_cmd) {
            apply_config(views_cmd, views_config);
            apply_threads(threads);
            return run_views(views_camera, views_image, views_out, views_grid, views_luts,
                             views_interp);
        }
        if (*bp_cmd) {
            apply_config(bp_cmd, bp_config);
            return run_backproject(bp_camera, bp_in, bp_out, bp_grid, bp_mode, bp_edge_samples);
        }
        if (*fuse_cmd) {
            apply_config(fuse_cmd, fuse_config);
            return run_fuse(fuse_in, fuse_out, fuse_flags, sweep_nt, sweep_sigma, sweep_ct);
        }
        if (*eval_cmd) {
            apply_config(eval_cmd, eval_config);
            apply_threads(threads);
            return run_eval(eval_methods, eval_table, eval_omni, eval_fusion, eval_ot, eval_out);
        }
        if (*pipe_cmd) {
            apply_config(pipe_cmd, pipe_config);
            apply_threads(threads);
            return run_pipeline(pipe_synthetic, pipe_manifest, pipe_omni_manifest, pipe_camera,
                                pipe_out, pipe_grid, pipe_fusion, pipe_ot, pipe_seed, pipe_scenes,
                                pipe_masks, pipe_mode, pipe_edge_samples);
        }
        if (*synth_cmd) {
            apply_config(synth_cmd, synth_config);
            return run_synth(synth_out, synth_seed, synth_scenes, synth_camera, synth_scene,
                             synth_grid, synth_noise, synth_masks, synth_mode, synth_edge_samples);
        }
        if (*conv_cmd) return run_convert(conv_in, conv_out);
        if (*lut_cmd) {
            if (*lut_export_cmd) {
                return run_lut_export(lute_camera, lute_azimuth, lute_elevation, lute_intrinsics,
                                      lute_out);
            }
            return run_lut_inspect(luti_in);
        }
    } catch (const ConfigError& err) {
        std::cerr << "error: " << err.what() << "\n";
        return 2;
    } catch (const ParseError& err) {
        std::cerr << "error: " << err.what() << "\n";
        return 2;
    } catch (const std::invalid_argument& err) {
        std::cerr << "error: " << err.what() << "\n";
        return 2;
    } catch (const std::exception& err) {
        std::cerr << "internal error: " << err.what() << "\n";
        return 1;
    }
    return 0;
}
