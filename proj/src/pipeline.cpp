#include "omnidet/pipeline.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <map>

#include "omnidet/config.hpp"

namespace omnidet::pipeline {

namespace {

std::string scene_name(int index) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "scene_%03d", index);
    return buf;
}

void write_lines_file(const std::filesystem::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot write: " + path.string());
    out << content;
}

}  // namespace

FisheyeCamera default_omni_camera() {
    FisheyeCamera cam;
    cam.focal = 190.0;
    cam.cx = 299.5;
    cam.cy = 299.5;
    cam.projection = FisheyeProjection::equidistant;
    cam.theta_max = kPi / 2;
    cam.width = 600;
    cam.height = 600;
    return cam;
}

ViewGridSpec default_view_grid() {
    ViewGridSpec spec;
    spec.azimuth_start = -3.14;
    spec.azimuth_end = 3.14;
    spec.azimuth_step = 0.2;
    spec.elevation_start = 0.0;
    spec.elevation_end = 0.9;
    spec.elevation_step = 0.3;
    spec.intrinsics = {100.0, 100.0, 0.0, 100.0, 100.0};
    return spec;
}

ViewsSummary render_views(const Image& omni_image, const FisheyeCamera& omni,
                          const std::vector<VirtualView>& views, const ViewsOptions& options) {
    if (omni_image.width != omni.width || omni_image.height != omni.height) {
        throw ConfigError("omni image size does not match the camera config");
    }
    std::filesystem::create_directories(options.out_dir);
    const char* extension = omni_image.channels == 3 ? ".ppm" : ".pgm";

    std::vector<std::string> failures(views.size());
#pragma omp parallel for schedule(dynamic)
    for (int i = 0; i < static_cast<int>(views.size()); ++i) {
        try {
            const LookupTable lut = reference::build_lut(views[i], omni);
            const Image rendered = reference::remap(omni_image, lut, options.interpolation);
            write_image(rendered, options.out_dir / (views[i].view_id + extension));
            if (options.write_luts) save_lut(lut, options.out_dir / (views[i].view_id + ".olut"));
        } catch (const std::exception& err) {
            failures[i] = err.what();
        }
    }
    for (const auto& failure : failures) {
        if (!failure.empty()) throw ConfigError("view rendering failed: " + failure);
    }

    std::string manifest;
    for (const auto& view : views) {
        manifest += view.view_id;
        manifest += '\n';
    }
    ViewsSummary summary;
    summary.view_count = static_cast<int>(views.size());
    summary.manifest_path = options.out_dir / "views.manifest";
    write_lines_file(summary.manifest_path, manifest);
    return summary;
}

BackprojectSummary backproject_detections(const std::vector<ParsedDetection>& detections,
                                          const std::string& source_name,
                                          const std::vector<VirtualView>& views,
                                          const FisheyeCamera& omni, BackprojectMode mode,
                                          int edge_samples, std::vector<Detection>& pooled) {
    std::map<std::string, const VirtualView*> by_id;
    for (const auto& view : views) by_id[view.view_id] = &view;

    BackprojectSummary summary;
    for (const auto& parsed : detections) {
        const auto it = by_id.find(parsed.detection.view_id);
        if (it == by_id.end()) {
            throw ParseError(source_name + ":" + std::to_string(parsed.line) +
                             ": unknown view_id '" + parsed.detection.view_id + "'");
        }
        const auto result =
            backproject_box(parsed.detection.box, *it->second, omni, mode, edge_samples);
        if (!result) {
            ++summary.dropped;
            continue;
        }
        Detection det = parsed.detection;
        det.box = *result.box;
        det.view_id = "omni";
        pooled.push_back(std::move(det));
        ++summary.kept;
    }
    return summary;
}

SyntheticDataset generate_synthetic_dataset(const SyntheticOptions& options) {
    options.view_noise.validate();
    options.omni_noise.validate();
    if (options.scene_count <= 0) throw ConfigError("scene count must be positive");
    const auto views = enumerate_views(options.grid);

    SyntheticDataset dataset;
    dataset.scenes.reserve(options.scene_count);
    dataset.pooled.resize(options.scene_count);
    dataset.omni.resize(options.scene_count);
    dataset.raw_views.resize(options.scene_count);
    for (int i = 0; i < options.scene_count; ++i) {
        dataset.scenes.push_back(
            random_scene(options.seed + static_cast<std::uint64_t>(i), options.omni,
                         options.scene_params));
    }

#pragma omp parallel for schedule(dynamic)
    for (int i = 0; i < options.scene_count; ++i) {
        const SyntheticScene& scene = dataset.scenes[i];
        const auto gt = render_gt(scene);
        auto per_view = synth_detections(scene, views, options.view_noise);

        EvalSample pooled;
        pooled.ground_truth = gt;
        for (const auto& vd : per_view) {
            const VirtualView* view = nullptr;
            for (const auto& v : views) {
                if (v.view_id == vd.view_id) {
                    view = &v;
                    break;
                }
            }
            for (const auto& det : vd.detections) {
                const auto result = backproject_box(det.box, *view, scene.omni, options.mode,
                                                    options.edge_samples);
                if (!result) continue;
                pooled.detections.push_back({*result.box, det.score, det.class_label, "omni"});
            }
        }
        dataset.pooled[i] = std::move(pooled);

        EvalSample omni_sample;
        omni_sample.ground_truth = gt;
        omni_sample.detections = synth_omni_detections(scene, options.omni_noise);
        dataset.omni[i] = std::move(omni_sample);
        dataset.raw_views[i] = std::move(per_view);
    }
    return dataset;
}

std::vector<BenchmarkMethod> table_methods(double nt, double sigma, double ct) {
    FusionParams nms;
    nms.variant = FusionVariant::nms;
    nms.overlap_threshold = nt;
    nms.confidence_threshold = ct;

    FusionParams gauss;
    gauss.variant = FusionVariant::soft_gaussian;
    gauss.sigma = sigma;
    gauss.confidence_threshold = ct;

    FusionParams linear;
    linear.variant = FusionVariant::soft_linear;
    linear.overlap_threshold = nt;
    linear.confidence_threshold = ct;

    return {{"nms", nms, true}, {"soft_gaussian", gauss, true}, {"soft_linear", linear, true}};
}

SyntheticRunResult run_synthetic_pipeline(const SyntheticOptions& options,
                                          const std::vector<BenchmarkMethod>& pooled_methods,
                                          const std::vector<BenchmarkMethod>& omni_methods,
                                          const std::filesystem::path& out_dir, bool write_masks) {
    namespace fs = std::filesystem;
    for (const auto& method : pooled_methods) method.params.validate();
    for (const auto& method : omni_methods) method.params.validate();
    fs::create_directories(out_dir);
    const SyntheticDataset dataset = generate_synthetic_dataset(options);

    {
        std::ofstream cam_out(out_dir / "omni.cam", std::ios::binary);
        write_fisheye_camera(options.omni, cam_out);
    }

    std::string pooled_manifest;
    std::string omni_manifest;
    for (int i = 0; i < options.scene_count; ++i) {
        const std::string name = scene_name(i);
        write_ground_truth(dataset.pooled[i].ground_truth, out_dir / (name + ".gt.txt"));

        std::vector<Detection> raw;
        for (const auto& vd : dataset.raw_views[i]) {
            raw.insert(raw.end(), vd.detections.begin(), vd.detections.end());
        }
        write_detections(raw, out_dir / (name + ".views.det"));
        write_detections(dataset.pooled[i].detections, out_dir / (name + ".pooled.det"));
        write_detections(dataset.omni[i].detections, out_dir / (name + ".omni.det"));
        if (write_masks) write_image(render_mask(dataset.scenes[i]), out_dir / (name + ".mask.pgm"));

        pooled_manifest += name + " " + name + ".pooled.det " + name + ".gt.txt\n";
        omni_manifest += name + " " + name + ".omni.det " + name + ".gt.txt\n";
    }
    write_lines_file(out_dir / "pooled.manifest", pooled_manifest);
    write_lines_file(out_dir / "omni.manifest", omni_manifest);

    // Evaluate in memory (the files above are the same data).
    SyntheticRunResult result;
    auto evaluate = [&](const std::vector<EvalSample>& samples,
                        const std::vector<BenchmarkMethod>& methods) {
        for (const auto& method : methods) {
            std::vector<EvalSample> fused(samples.size());
#pragma omp parallel for schedule(dynamic)
            for (int i = 0; i < static_cast<int>(samples.size()); ++i) {
                fused[i].ground_truth = samples[i].ground_truth;
                fused[i].detections = method.apply_fusion
                                          ? fuse(samples[i].detections, method.params)
                                          : samples[i].detections;
            }
            PrCurve curve = pr_curve(fused, options.overlap_threshold, "person");
            result.report.rows.push_back(average_precision(curve, method.tag));
            const fs::path pr_path = out_dir / ("pr_" + method.tag + "_person.csv");
            std::ofstream pr_out(pr_path, std::ios::binary);
            write_pr_csv(curve, pr_out);
            result.pr_csv_paths.push_back(pr_path);
            result.report.curves.push_back(std::move(curve));
        }
    };
    evaluate(dataset.pooled, pooled_methods);
    evaluate(dataset.omni, omni_methods);

    result.ap_csv_path = out_dir / "ap.csv";
    std::ofstream ap_out(result.ap_csv_path, std::ios::binary);
    write_ap_csv(result.report.rows, ap_out, false);
    return result;
}

}  // namespace omnidet::pipeline
