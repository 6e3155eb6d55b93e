#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>

namespace fundus::cli {

/// A fully parsed batch job. Paths are validated by run(); parameter
/// ranges are validated by the subcommand definitions.
struct JobManifest {
    std::string task; // prep | fit-contour | rasterize | encode-grid | decode-grid |
                      // boundary-loss | fit-descent | detach-mask | tta-merge | eval
    std::filesystem::path input_dir;
    std::filesystem::path truth_dir;      // eval, boundary-loss
    std::filesystem::path flipped_dir;    // tta-merge
    std::filesystem::path transforms_dir; // tta-merge, optional
    std::filesystem::path output_dir;

    int n = 5;       // basis order
    int k = 72;      // reconstruction angles
    int grid = 10;   // grid cells per axis
    int frame = 299; // normalized frame side in pixels

    double threshold = 0.5; // detach-mask score threshold
    int steps = 5000;       // fit-descent
    double rate = 1e-3;     // fit-descent
    bool rescale = false;   // prep: also write the [-1, 1] float raster
    std::string mode;       // eval: masks | points | scores
    int workers = 1;
};

struct ManifestError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

inline constexpr int kExitOk = 0;
inline constexpr int kExitPartialFailure = 1;
inline constexpr int kExitBadManifest = 2;

/// Executes the job, writes artifacts plus run_summary.json into the
/// output directory, and reports per-file failures without aborting
/// the batch.
int run(const JobManifest& manifest);

} // namespace fundus::cli
