#pragma once

#include <vector>

#include "fundus/geometry.hpp"

namespace fundus {

/// G x G grid of (probability, dx, dy) cells over an image frame.
/// Displacements are fractions of a cell measured from the cell's
/// top-left corner. A ground-truth encoding has exactly one cell with
/// p = 1 and zeros elsewhere.
struct GridTarget {
    int grid = 10;
    int frame_h = 299;
    int frame_w = 299;
    std::vector<double> cells; // grid*grid*3 values, (p, dx, dy) per cell, row-major

    GridTarget() : cells(static_cast<std::size_t>(grid) * grid * 3, 0.0) {}
    GridTarget(int g, int h, int w)
        : grid(g), frame_h(h), frame_w(w),
          cells(static_cast<std::size_t>(g) * g * 3, 0.0) {}

    double cell_w() const { return static_cast<double>(frame_w) / grid; }
    double cell_h() const { return static_cast<double>(frame_h) / grid; }

    double& p(int j, int k) { return cells[idx(j, k)]; }
    double p(int j, int k) const { return cells[idx(j, k)]; }
    double& dx(int j, int k) { return cells[idx(j, k) + 1]; }
    double dx(int j, int k) const { return cells[idx(j, k) + 1]; }
    double& dy(int j, int k) { return cells[idx(j, k) + 2]; }
    double dy(int j, int k) const { return cells[idx(j, k) + 2]; }

private:
    std::size_t idx(int j, int k) const {
        return (static_cast<std::size_t>(j) * grid + k) * 3;
    }
};

GridTarget encode_center(Point center, int frame_h, int frame_w, int grid = 10);

/// Center of the argmax-probability cell; ties break to the smallest
/// (j, k) in row-major order.
Point decode_center(const GridTarget& grid);

/// How the displacement loss weights each cell. The object-indicator
/// reading masks the squared error by the ground-truth cell indicator;
/// the literal-y reading multiplies by the ground-truth y displacement
/// instead and is kept for comparison only.
enum class DispWeight { ObjectIndicator, LiteralY };

inline constexpr double kProbClamp = 1e-7;
inline constexpr double kClsWeightObject = 0.75;
inline constexpr double kClsWeightBackground = 0.25;

using GridBatch = std::vector<GridTarget>;

/// Weighted cross entropy over all cells, mean over the batch.
double loss_cls(const GridBatch& truth, const GridBatch& pred);

/// Squared displacement error in the ground-truth object cell, mean
/// over the batch.
double loss_disp(const GridBatch& truth, const GridBatch& pred,
                 DispWeight weight = DispWeight::ObjectIndicator);

/// 2 * loss_cls + loss_disp.
double loss_total(const GridBatch& truth, const GridBatch& pred);

/// Partials of loss_total w.r.t. every predicted (p, dx, dy), one grid
/// of partials per batch item. Probabilities at or beyond the clamp
/// bounds get zero gradient.
GridBatch grad_loss_total(const GridBatch& truth, const GridBatch& pred);

} // namespace fundus
