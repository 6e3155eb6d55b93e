#include "cli_tasks.hpp"

#include <algorithm>
#include <atomic>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <optional>
#include <thread>
#include <vector>

#include <json.hpp>

#include "fundus/boundary_loss.hpp"
#include "fundus/grid_target.hpp"
#include "fundus/image_ops.hpp"
#include "fundus/lesion_masks.hpp"
#include "fundus/metrics.hpp"
#include "fundus/polar_contour.hpp"
#include "fundus/raster_io.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace fundus::cli {

namespace {

struct FileOutcome {
    std::string input;
    std::string output;  // empty when the task produced no artifact
    std::string status = "ok";
    std::string message; // error text for failed files
    json extra;          // per-file values (losses, metrics)
};

struct TaskContext {
    const JobManifest& manifest;
    std::vector<fs::path> files; // primary inputs, sorted
};

std::vector<fs::path> list_inputs(const fs::path& dir, const std::string& ext) {
    if (!fs::is_directory(dir))
        throw ManifestError(dir.string() + ": not a directory");
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(dir))
        if (entry.is_regular_file() && entry.path().extension() == ext) {
            // Float-raster sidecars live next to their data files.
            if (ext == ".json" && entry.path().stem().extension() == ".f32") continue;
            files.push_back(entry.path());
        }
    std::sort(files.begin(), files.end());
    if (files.empty())
        throw ManifestError(dir.string() + ": no " + ext + " inputs found");
    return files;
}

fs::path paired(const fs::path& dir, const fs::path& input, const std::string& ext) {
    fs::path candidate = dir / (input.stem().string() + ext);
    if (!fs::exists(candidate))
        throw std::runtime_error("no counterpart for stem '" + input.stem().string() +
                                 "' in " + dir.string());
    return candidate;
}

void write_transform_file(const fs::path& path, const FrameTransform& t,
                          int orig_h, int orig_w) {
    json j{{"crop_offset_x", t.crop_offset_x}, {"crop_offset_y", t.crop_offset_y},
           {"scale_x", t.scale_x},             {"scale_y", t.scale_y},
           {"orig_height", orig_h},            {"orig_width", orig_w}};
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw std::runtime_error(path.string() + ": cannot open for writing");
    out << j.dump(2) << '\n';
}

struct StoredTransform {
    FrameTransform transform;
    int orig_h = 0;
    int orig_w = 0;
};

StoredTransform read_transform_file(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error(path.string() + ": cannot open");
    json j;
    try {
        in >> j;
        return {{j.at("crop_offset_x").get<double>(), j.at("crop_offset_y").get<double>(),
                 j.at("scale_x").get<double>(), j.at("scale_y").get<double>()},
                j.at("orig_height").get<int>(),
                j.at("orig_width").get<int>()};
    } catch (const json::exception& e) {
        throw std::runtime_error(path.string() + ": " + e.what());
    }
}

json read_json_file(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error(path.string() + ": cannot open");
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw std::runtime_error(path.string() + ": " + e.what());
    }
    return j;
}

// ---- per-task file handlers -------------------------------------------------

FileOutcome do_prep(const TaskContext& ctx, const fs::path& input) {
    const auto& m = ctx.manifest;
    const Raster img = read_png(input);
    const auto [square, crop_t] = center_square_crop(img);
    const auto [resized, resize_t] = resize(square, m.frame, m.frame);
    const FrameTransform combined = crop_t.then(resize_t);

    const fs::path img_out = m.output_dir / "images" / (input.stem().string() + ".png");
    write_png(img_out, resized);
    write_transform_file(m.output_dir / "transforms" / (input.stem().string() + ".json"),
                         combined, img.height(), img.width());
    if (m.rescale)
        write_float_raster(m.output_dir / "images" / (input.stem().string() + ".f32"),
                           rescale_pixels(resized));
    return {input.string(), img_out.string()};
}

FileOutcome do_fit_contour(const TaskContext& ctx, const fs::path& input) {
    const auto& m = ctx.manifest;
    const Raster mask = read_png(input);
    const ExtractedContour extracted = extract_contour(mask);
    const BasisSpec basis = basis_exponents(m.n);
    ContourModel model;
    model.n = m.n;
    model.center = extracted.center;
    model.beta = fit_contour(contour_to_polar(extracted.boundary, extracted.center), basis);

    const fs::path out = m.output_dir / (input.stem().string() + ".json");
    write_contour_model(out, model);
    return {input.string(), out.string()};
}

FileOutcome do_rasterize(const TaskContext& ctx, const fs::path& input) {
    const auto& m = ctx.manifest;
    const ContourModel model = read_contour_model(input);
    const ReconstructedContour contour = reconstruct_contour(model, m.k);
    const RasterizedContour raster = rasterize_contour(contour.points, m.frame, m.frame);

    const fs::path out = m.output_dir / (input.stem().string() + ".png");
    write_png(out, raster.mask);
    FileOutcome outcome{input.string(), out.string()};
    outcome.extra["clamped_radius"] = contour.clamped;
    outcome.extra["degenerate"] = raster.degenerate;
    return outcome;
}

FileOutcome do_encode_grid(const TaskContext& ctx, const fs::path& input) {
    const auto& m = ctx.manifest;
    const PointSet points = read_point_csv(input);
    if (points.empty()) throw std::runtime_error(input.string() + ": no center point");
    const GridTarget target = encode_center(points.front(), m.frame, m.frame, m.grid);

    Raster raster = Raster::f32(m.grid, m.grid, 3);
    for (std::size_t i = 0; i < target.cells.size(); ++i)
        raster.floats()[i] = static_cast<float>(target.cells[i]);
    const fs::path out = m.output_dir / (input.stem().string() + ".f32");
    write_float_raster(out, raster);
    return {input.string(), out.string()};
}

FileOutcome do_decode_grid(const TaskContext& ctx, const fs::path& input) {
    const auto& m = ctx.manifest;
    const Raster raster = read_float_raster(input);
    if (raster.channels() != 3 || raster.height() != raster.width())
        throw std::runtime_error(input.string() + ": expected a square 3-channel grid");
    GridTarget target(raster.height(), m.frame, m.frame);
    for (std::size_t i = 0; i < target.cells.size(); ++i)
        target.cells[i] = raster.floats()[i];

    const fs::path out = m.output_dir / (input.stem().string() + ".csv");
    write_point_csv(out, {decode_center(target)});
    return {input.string(), out.string()};
}

FileOutcome do_boundary_loss(const TaskContext& ctx, const fs::path& input) {
    const auto& m = ctx.manifest;
    const ContourModel pred = read_contour_model(input);
    const ContourModel truth = read_contour_model(paired(m.truth_dir, input, ".json"));
    const ThetaMatrix theta = theta_matrix(m.k, basis_exponents(m.n));

    FileOutcome outcome{input.string(), ""};
    outcome.extra["loss"] = boundary_loss(truth, pred, theta);
    return outcome;
}

FileOutcome do_fit_descent(const TaskContext& ctx, const fs::path& input) {
    const auto& m = ctx.manifest;
    const PointSet target = read_point_csv(input);
    DescentOptions options;
    options.steps = m.steps;
    options.rate = m.rate;
    options.k = m.k;
    options.n = m.n;
    const DescentResult result = fit_by_descent(target, std::nullopt, options);

    const fs::path out = m.output_dir / (input.stem().string() + ".json");
    write_contour_model(out, result.model);
    FileOutcome outcome{input.string(), out.string()};
    outcome.extra["loss"] = result.loss;
    outcome.extra["steps_run"] = result.steps_run;
    outcome.extra["diverged"] = result.diverged;
    return outcome;
}

FileOutcome do_detach_mask(const TaskContext& ctx, const fs::path& input) {
    const auto& m = ctx.manifest;
    const json j = read_json_file(input);
    double score = 0.0;
    int h = 0, w = 0;
    try {
        score = j.at("score").get<double>();
        h = j.at("height").get<int>();
        w = j.at("width").get<int>();
    } catch (const json::exception& e) {
        throw std::runtime_error(input.string() + ": " + e.what());
    }
    const bool detected = score >= m.threshold;
    const Raster mask =
        detected ? detachment_mask(h, w) : Raster::u8(h, w, 1, kMaskBackground);

    const fs::path out = m.output_dir / (input.stem().string() + ".png");
    write_png(out, mask);
    FileOutcome outcome{input.string(), out.string()};
    outcome.extra["detected"] = detected;
    return outcome;
}

FileOutcome do_tta_merge(const TaskContext& ctx, const fs::path& input) {
    const auto& m = ctx.manifest;
    ProbMapPair pair;
    pair.original = read_float_raster(input);
    pair.flipped = read_float_raster(paired(m.flipped_dir, input, ".f32"));
    Raster mask = argmax_mask(flip_merge(pair));
    if (!m.transforms_dir.empty()) {
        const StoredTransform stored =
            read_transform_file(paired(m.transforms_dir, input, ".json"));
        mask = denormalize_mask(mask, stored.transform, stored.orig_h, stored.orig_w);
    }
    const fs::path out = m.output_dir / (input.stem().string() + ".png");
    write_png(out, mask);
    return {input.string(), out.string()};
}

FileOutcome do_eval_masks(const TaskContext& ctx, const fs::path& input) {
    const auto& m = ctx.manifest;
    const Raster pred = read_png(input);
    const Raster truth = read_png(paired(m.truth_dir, input, ".png"));
    if (!pred.same_shape(truth))
        throw std::runtime_error(input.string() + ": dimension mismatch with truth");

    long long tp = 0, fp = 0, fn = 0;
    for (std::size_t i = 0; i < pred.bytes().size(); ++i) {
        const bool p = pred.bytes()[i] == kMaskForeground;
        const bool t = truth.bytes()[i] == kMaskForeground;
        tp += p && t;
        fp += p && !t;
        fn += !p && t;
    }
    FileOutcome outcome{input.string(), ""};
    outcome.extra["dice"] = dice(pred, truth);
    outcome.extra["tp"] = tp;
    outcome.extra["fp"] = fp;
    outcome.extra["fn"] = fn;
    return outcome;
}

FileOutcome do_eval_points(const TaskContext& ctx, const fs::path& input) {
    const auto& m = ctx.manifest;
    const PointSet pred = read_point_csv(input);
    const PointSet truth = read_point_csv(paired(m.truth_dir, input, ".csv"));
    if (pred.size() != truth.size())
        throw std::runtime_error(input.string() + ": point count mismatch with truth");
    double sum = 0.0;
    for (std::size_t i = 0; i < pred.size(); ++i) sum += distance(truth[i], pred[i]);
    FileOutcome outcome{input.string(), ""};
    outcome.extra["distance_sum"] = sum;
    outcome.extra["points"] = pred.size();
    return outcome;
}

FileOutcome do_eval_scores(const TaskContext& ctx, const fs::path& input) {
    const auto& m = ctx.manifest;
    const json pred = read_json_file(input);
    const json truth = read_json_file(paired(m.truth_dir, input, ".json"));
    FileOutcome outcome{input.string(), ""};
    try {
        outcome.extra["score"] = pred.at("score").get<double>();
        outcome.extra["label"] = truth.at("label").get<int>();
    } catch (const json::exception& e) {
        throw std::runtime_error(input.string() + ": " + e.what());
    }
    return outcome;
}

// ---- batch driver -----------------------------------------------------------

using Handler = std::function<FileOutcome(const TaskContext&, const fs::path&)>;

std::vector<FileOutcome> run_files(const TaskContext& ctx, const Handler& handler) {
    std::vector<FileOutcome> outcomes(ctx.files.size());
    const int workers =
        std::max(1, std::min(ctx.manifest.workers, static_cast<int>(ctx.files.size())));
    std::atomic<std::size_t> next{0};
    auto work = [&] {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= ctx.files.size()) return;
            try {
                outcomes[i] = handler(ctx, ctx.files[i]);
            } catch (const std::exception& e) {
                outcomes[i] = {ctx.files[i].string(), "", "error", e.what()};
            }
        }
    };
    if (workers == 1) {
        work();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(workers);
        for (int i = 0; i < workers; ++i) pool.emplace_back(work);
        for (auto& t : pool) t.join();
    }
    return outcomes;
}

json summarize(const JobManifest& m, const std::vector<FileOutcome>& outcomes) {
    json files = json::array();
    int failed = 0;
    for (const auto& o : outcomes) {
        json entry{{"input", o.input}, {"status", o.status}};
        if (!o.output.empty()) entry["output"] = o.output;
        if (!o.message.empty()) entry["message"] = o.message;
        if (!o.extra.is_null()) entry["values"] = o.extra;
        files.push_back(entry);
        failed += o.status != "ok";
    }
    return json{{"task", m.task},
                {"parameters",
                 {{"n", m.n}, {"k", m.k}, {"grid", m.grid}, {"frame", m.frame},
                  {"threshold", m.threshold}, {"steps", m.steps}, {"rate", m.rate},
                  {"mode", m.mode}}},
                {"files", files},
                {"failed", failed},
                {"total", static_cast<int>(outcomes.size())}};
}

/// Batch-level reductions appended to the summary (and written as a
/// report for eval / boundary-loss).
void reduce_eval(const JobManifest& m, const std::vector<FileOutcome>& outcomes,
                 json& summary) {
    EvalReport report;
    if (m.mode == "masks") {
        double dice_sum = 0.0;
        long long tp = 0, fp = 0, fn = 0, counted = 0;
        for (const auto& o : outcomes) {
            if (o.status != "ok") continue;
            dice_sum += o.extra.at("dice").get<double>();
            tp += o.extra.at("tp").get<long long>();
            fp += o.extra.at("fp").get<long long>();
            fn += o.extra.at("fn").get<long long>();
            ++counted;
        }
        if (counted > 0) {
            report.items = counted;
            report.values["mean_dice"] = dice_sum / static_cast<double>(counted);
            const double denom = static_cast<double>(2 * tp + fp + fn);
            report.values["pixel_f1"] =
                denom == 0.0 ? 0.0 : 2.0 * static_cast<double>(tp) / denom;
        }
    } else if (m.mode == "points") {
        double sum = 0.0;
        long long points = 0, counted = 0;
        for (const auto& o : outcomes) {
            if (o.status != "ok") continue;
            sum += o.extra.at("distance_sum").get<double>();
            points += o.extra.at("points").get<long long>();
            ++counted;
        }
        if (points > 0) {
            report.items = counted;
            report.values["mean_euclidean"] = sum / static_cast<double>(points);
        }
    } else { // scores
        std::vector<LabeledScore> scores;
        for (const auto& o : outcomes) {
            if (o.status != "ok") continue;
            scores.push_back({o.extra.at("score").get<double>(),
                              o.extra.at("label").get<int>()});
        }
        if (!scores.empty()) {
            report.items = static_cast<long>(scores.size());
            report.values["bce"] = bce(scores);
            report.values["auc_roc"] = auc_roc(scores); // throws on one-class input
        }
    }
    report.write_json(m.output_dir / "report.json");
    report.write_csv(m.output_dir / "report.csv");
    json metrics = json::object();
    for (const auto& [name, value] : report.values) metrics[name] = value;
    summary["report"] = metrics;
}

void reduce_boundary_loss(const JobManifest& m, const std::vector<FileOutcome>& outcomes,
                          json& summary) {
    double sum = 0.0;
    long long counted = 0;
    for (const auto& o : outcomes) {
        if (o.status != "ok") continue;
        sum += o.extra.at("loss").get<double>();
        ++counted;
    }
    if (counted > 0) {
        json report{{"mean_loss", sum / static_cast<double>(counted)},
                    {"pairs", counted}};
        std::ofstream out(m.output_dir / "report.json", std::ios::trunc);
        out << report.dump(2) << '\n';
        summary["report"] = report;
    }
}

} // namespace

int run(const JobManifest& manifest) {
    try {
        TaskContext ctx{manifest, {}};
        Handler handler;
        bool needs_truth = false;

        if (manifest.task == "prep") {
            ctx.files = list_inputs(manifest.input_dir, ".png");
            handler = do_prep;
        } else if (manifest.task == "fit-contour") {
            ctx.files = list_inputs(manifest.input_dir, ".png");
            handler = do_fit_contour;
        } else if (manifest.task == "rasterize") {
            ctx.files = list_inputs(manifest.input_dir, ".json");
            handler = do_rasterize;
        } else if (manifest.task == "encode-grid") {
            ctx.files = list_inputs(manifest.input_dir, ".csv");
            handler = do_encode_grid;
        } else if (manifest.task == "decode-grid") {
            ctx.files = list_inputs(manifest.input_dir, ".f32");
            handler = do_decode_grid;
        } else if (manifest.task == "boundary-loss") {
            ctx.files = list_inputs(manifest.input_dir, ".json");
            handler = do_boundary_loss;
            needs_truth = true;
        } else if (manifest.task == "fit-descent") {
            ctx.files = list_inputs(manifest.input_dir, ".csv");
            handler = do_fit_descent;
        } else if (manifest.task == "detach-mask") {
            ctx.files = list_inputs(manifest.input_dir, ".json");
            handler = do_detach_mask;
        } else if (manifest.task == "tta-merge") {
            ctx.files = list_inputs(manifest.input_dir, ".f32");
            handler = do_tta_merge;
            if (!fs::is_directory(manifest.flipped_dir))
                throw ManifestError("tta-merge: --flipped is not a directory");
            if (!manifest.transforms_dir.empty() &&
                !fs::is_directory(manifest.transforms_dir))
                throw ManifestError("tta-merge: --transforms is not a directory");
        } else if (manifest.task == "eval") {
            if (manifest.mode == "masks")
                ctx.files = list_inputs(manifest.input_dir, ".png");
            else if (manifest.mode == "points")
                ctx.files = list_inputs(manifest.input_dir, ".csv");
            else if (manifest.mode == "scores")
                ctx.files = list_inputs(manifest.input_dir, ".json");
            else
                throw ManifestError("eval: mode must be masks, points, or scores");
            handler = manifest.mode == "masks"    ? Handler(do_eval_masks)
                      : manifest.mode == "points" ? Handler(do_eval_points)
                                                  : Handler(do_eval_scores);
            needs_truth = true;
        } else {
            throw ManifestError("unknown task '" + manifest.task + "'");
        }

        if (needs_truth && !fs::is_directory(manifest.truth_dir))
            throw ManifestError(manifest.task + ": truth directory required");

        fs::create_directories(manifest.output_dir);
        if (manifest.task == "prep") {
            fs::create_directories(manifest.output_dir / "images");
            fs::create_directories(manifest.output_dir / "transforms");
        }

        const std::vector<FileOutcome> outcomes = run_files(ctx, handler);
        json summary = summarize(manifest, outcomes);
        if (manifest.task == "eval") reduce_eval(manifest, outcomes, summary);
        if (manifest.task == "boundary-loss")
            reduce_boundary_loss(manifest, outcomes, summary);

        std::ofstream out(manifest.output_dir / "run_summary.json", std::ios::trunc);
        if (!out) {
            std::cerr << "cannot write run summary\n";
            return kExitBadManifest;
        }
        out << summary.dump(2) << '\n';

        const int failed = summary["failed"].get<int>();
        std::cout << manifest.task << ": " << (summary["total"].get<int>() - failed)
                  << "/" << summary["total"].get<int>() << " files ok\n";
        if (summary.contains("report"))
            for (const auto& [name, value] : summary["report"].items())
                if (value.is_number()) {
                    char buf[64];
                    std::snprintf(buf, sizeof buf, "%.6f", value.get<double>());
                    std::cout << "  " << name << " = " << buf << '\n';
                }
        return failed == 0 ? kExitOk : kExitPartialFailure;
    } catch (const ManifestError& e) {
        std::cerr << "manifest error: " << e.what() << '\n';
        return kExitBadManifest;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitBadManifest;
    }
}

} // namespace fundus::cli
