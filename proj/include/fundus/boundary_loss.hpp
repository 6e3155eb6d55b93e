#pragma once

#include <Eigen/Dense>

#include <optional>
#include <utility>
#include <vector>

#include "fundus/geometry.hpp"
#include "fundus/polar_contour.hpp"

namespace fundus {

/// Basis evaluations at K equally spaced angles starting at 0;
/// row k equals the design-matrix row at theta_k = 2*pi*k/K.
struct ThetaMatrix {
    BasisSpec basis;
    std::vector<double> angles;
    Eigen::MatrixXd rows; // K x (n+1)^2

    int k() const { return static_cast<int>(angles.size()); }
};

ThetaMatrix theta_matrix(int k, const BasisSpec& basis);

/// Squared Cartesian distance between the two reconstructed contours,
/// summed over the K angles. Per-angle points are
/// (cos t * r + c_x, sin t * r + c_y) with r the basis radius.
double boundary_loss(const ContourModel& truth, const ContourModel& pred,
                     const ThetaMatrix& theta);

/// Mean of boundary_loss over model pairs (truth, pred).
double boundary_loss_batch(
    const std::vector<std::pair<ContourModel, ContourModel>>& pairs,
    const ThetaMatrix& theta);

/// Partials w.r.t. the predicted parameters: (n+1)^2 beta entries
/// followed by center x and y (38 values for n = 5).
struct BoundaryGradient {
    std::vector<double> beta;
    double center_x = 0.0;
    double center_y = 0.0;
};

BoundaryGradient boundary_loss_grad(const ContourModel& truth, const ContourModel& pred,
                                    const ThetaMatrix& theta);

struct DescentOptions {
    int steps = 5000;
    double rate = 1e-3;
    double min_improvement = 1e-10;      // early stop threshold
    int k = 72;                          // reconstruction angles
    int n = 5;                           // basis order
    std::vector<double> beta_init;       // empty = zeros
};

struct DescentResult {
    ContourModel model; // best iterate
    double loss = 0.0;
    int steps_run = 0;
    bool diverged = false; // loss rose for 10 consecutive steps
};

/// Gradient-descent fit of a contour: the target points are reduced to
/// a reference model by the normal-equation fit around `center_init`
/// (target centroid when absent), then the predicted parameters are
/// descended on boundary_loss against that reference.
DescentResult fit_by_descent(const PointSet& target,
                             std::optional<Point> center_init = std::nullopt,
                             const DescentOptions& options = {});

} // namespace fundus
