#pragma once

#include <Eigen/Dense>

#include <filesystem>
#include <utility>
#include <vector>

#include "fundus/geometry.hpp"
#include "fundus/raster.hpp"

namespace fundus {

/// Exponent pairs (c_k, s_k) of the trigonometric product basis
/// cos(theta)^c * sin(theta)^s, row-major over {0..n} x {0..n}.
struct BasisSpec {
    int n = 5;
    std::vector<std::pair<int, int>> exponents; // (n+1)^2 entries

    int size() const { return static_cast<int>(exponents.size()); }
};

BasisSpec basis_exponents(int n);

struct PolarSamples {
    std::vector<double> angles; // radians in [0, 2*pi)
    std::vector<double> radii;  // pixels, non-negative
};

/// Radius-of-angle boundary model: r(theta) = sum_k beta_k cos^c sin^s,
/// anchored at `center` in image coordinates (y axis downward).
struct ContourModel {
    int n = 5;
    std::vector<double> beta; // (n+1)^2 coefficients
    Point center;
};

/// Angles via atan2 in image coordinates, normalized to [0, 2*pi);
/// radii are distances from `center`. A point coincident with the
/// center has no angle and is rejected.
PolarSamples contour_to_polar(const PointSet& points, Point center);

/// m x (n+1)^2 matrix, entry (i, k) = cos(theta_i)^c_k * sin(theta_i)^s_k.
/// 0^0 is 1 so the constant column exists at every angle.
Eigen::MatrixXd design_matrix(const std::vector<double>& angles, const BasisSpec& basis);

Eigen::RowVectorXd design_row(double angle, const BasisSpec& basis);

/// Minimum-norm least-squares solution of Y = X beta. The trig identity
/// cos^2 + sin^2 = 1 makes X^T X singular for n >= 2, so the normal
/// equations are solved through an SVD pseudo-inverse with singular
/// values below 1e-10 * sigma_max treated as zero.
std::vector<double> fit_contour(const PolarSamples& samples, const BasisSpec& basis);

double radius_at(const ContourModel& model, double theta);

struct ReconstructedContour {
    PointSet points;
    bool clamped = false; // some reconstructed radius was negative and clamped to 0
};

/// Points (c_x + r_k cos theta_k, c_y + r_k sin theta_k) at
/// theta_k = 2*pi*k/K, k = 0..K-1.
ReconstructedContour reconstruct_contour(const ContourModel& model, int k = 72);

struct ExtractedContour {
    PointSet boundary; // Moore-neighbor trace, clockwise from topmost-leftmost
    Point center;      // foreground centroid
};

/// Boundary of the single 4-connected foreground (value 0) region of a
/// binary mask.
ExtractedContour extract_contour(const Raster& mask);

struct RasterizedContour {
    Raster mask;
    bool degenerate = false; // collinear polygon, empty foreground
};

/// Scanline fill of the closed polygon, boundary pixels included.
/// Foreground 0, background 255.
RasterizedContour rasterize_contour(const PointSet& points, int height, int width);

/// JSON layout: {"n":5,"beta":[...],"center":[cx,cy]}.
void write_contour_model(const std::filesystem::path& path, const ContourModel& model);
ContourModel read_contour_model(const std::filesystem::path& path);

/// CSV with header "x,y".
void write_point_csv(const std::filesystem::path& path, const PointSet& points);
PointSet read_point_csv(const std::filesystem::path& path);

} // namespace fundus
