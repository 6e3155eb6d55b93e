#include "fundus/grid_target.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace fundus {

namespace {

void check_batch(const GridBatch& truth, const GridBatch& pred) {
    if (truth.empty()) throw std::invalid_argument("grid loss: empty batch");
    if (truth.size() != pred.size())
        throw std::invalid_argument("grid loss: batch size mismatch");
    for (std::size_t i = 0; i < truth.size(); ++i) {
        if (truth[i].grid != pred[i].grid || truth[i].cells.size() != pred[i].cells.size())
            throw std::invalid_argument("grid loss: grid shape mismatch");
    }
}

double clamp_prob(double p) {
    return std::clamp(p, kProbClamp, 1.0 - kProbClamp);
}

} // namespace

GridTarget encode_center(Point center, int frame_h, int frame_w, int grid) {
    if (grid < 1 || frame_h < 1 || frame_w < 1)
        throw std::invalid_argument("encode_center: invalid grid or frame");
    if (!(center.x >= 0 && center.x < frame_w && center.y >= 0 && center.y < frame_h))
        throw std::invalid_argument("encode_center: center outside frame");

    GridTarget out(grid, frame_h, frame_w);
    const double cw = out.cell_w(), ch = out.cell_h();
    const int k = std::min(static_cast<int>(center.x / cw), grid - 1);
    const int j = std::min(static_cast<int>(center.y / ch), grid - 1);
    out.p(j, k) = 1.0;
    out.dx(j, k) = (center.x - k * cw) / cw;
    out.dy(j, k) = (center.y - j * ch) / ch;
    return out;
}

Point decode_center(const GridTarget& grid) {
    int best_j = 0, best_k = 0;
    double best_p = grid.p(0, 0);
    for (int j = 0; j < grid.grid; ++j)
        for (int k = 0; k < grid.grid; ++k)
            if (grid.p(j, k) > best_p) {
                best_p = grid.p(j, k);
                best_j = j;
                best_k = k;
            }
    return {(best_k + grid.dx(best_j, best_k)) * grid.cell_w(),
            (best_j + grid.dy(best_j, best_k)) * grid.cell_h()};
}

double loss_cls(const GridBatch& truth, const GridBatch& pred) {
    check_batch(truth, pred);
    double sum = 0.0;
    for (std::size_t i = 0; i < truth.size(); ++i) {
        const int g = truth[i].grid;
        for (int j = 0; j < g; ++j)
            for (int k = 0; k < g; ++k) {
                const double c = truth[i].p(j, k);
                const double p = clamp_prob(pred[i].p(j, k));
                sum += kClsWeightObject * c * std::log(p) +
                       kClsWeightBackground * (1.0 - c) * std::log(1.0 - p);
            }
    }
    return -sum / static_cast<double>(truth.size());
}

double loss_disp(const GridBatch& truth, const GridBatch& pred, DispWeight weight) {
    check_batch(truth, pred);
    double sum = 0.0;
    for (std::size_t i = 0; i < truth.size(); ++i) {
        const int g = truth[i].grid;
        for (int j = 0; j < g; ++j)
            for (int k = 0; k < g; ++k) {
                const double w = weight == DispWeight::ObjectIndicator ? truth[i].p(j, k)
                                                                       : truth[i].dy(j, k);
                const double ex = truth[i].dx(j, k) - pred[i].dx(j, k);
                const double ey = truth[i].dy(j, k) - pred[i].dy(j, k);
                sum += (ex * ex + ey * ey) * w;
            }
    }
    return sum / static_cast<double>(truth.size());
}

double loss_total(const GridBatch& truth, const GridBatch& pred) {
    return 2.0 * loss_cls(truth, pred) + loss_disp(truth, pred);
}

GridBatch grad_loss_total(const GridBatch& truth, const GridBatch& pred) {
    check_batch(truth, pred);
    const double m = static_cast<double>(truth.size());
    GridBatch grads;
    grads.reserve(truth.size());
    for (std::size_t i = 0; i < truth.size(); ++i) {
        GridTarget grad(truth[i].grid, truth[i].frame_h, truth[i].frame_w);
        const int g = truth[i].grid;
        for (int j = 0; j < g; ++j)
            for (int k = 0; k < g; ++k) {
                const double c = truth[i].p(j, k);
                const double p_raw = pred[i].p(j, k);
                if (p_raw > kProbClamp && p_raw < 1.0 - kProbClamp) {
                    grad.p(j, k) = 2.0 *
                                   (-(kClsWeightObject * c / p_raw) +
                                    kClsWeightBackground * (1.0 - c) / (1.0 - p_raw)) /
                                   m;
                }
                grad.dx(j, k) = 2.0 * (pred[i].dx(j, k) - truth[i].dx(j, k)) * c / m;
                grad.dy(j, k) = 2.0 * (pred[i].dy(j, k) - truth[i].dy(j, k)) * c / m;
            }
        grads.push_back(std::move(grad));
    }
    return grads;
}

} // namespace fundus
