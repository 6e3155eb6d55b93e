#include "fundus/boundary_loss.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace fundus {

namespace {

void check_compatible(const ContourModel& truth, const ContourModel& pred,
                      const ThetaMatrix& theta) {
    if (truth.n != pred.n || truth.beta.size() != pred.beta.size())
        throw std::invalid_argument("boundary_loss: basis mismatch between models");
    if (theta.rows.cols() != static_cast<Eigen::Index>(truth.beta.size()))
        throw std::invalid_argument("boundary_loss: basis mismatch with theta matrix");
}

struct Residuals {
    Eigen::VectorXd ex; // per-angle x difference, truth minus pred
    Eigen::VectorXd ey;
};

Residuals residuals(const ContourModel& truth, const ContourModel& pred,
                    const ThetaMatrix& theta) {
    const auto beta_t = Eigen::Map<const Eigen::VectorXd>(truth.beta.data(), truth.beta.size());
    const auto beta_p = Eigen::Map<const Eigen::VectorXd>(pred.beta.data(), pred.beta.size());
    const Eigen::VectorXd r_t = theta.rows * beta_t;
    const Eigen::VectorXd r_p = theta.rows * beta_p;
    Residuals res;
    res.ex.resize(theta.k());
    res.ey.resize(theta.k());
    for (int k = 0; k < theta.k(); ++k) {
        const double c = std::cos(theta.angles[k]);
        const double s = std::sin(theta.angles[k]);
        res.ex(k) = c * r_t(k) + truth.center.x - c * r_p(k) - pred.center.x;
        res.ey(k) = s * r_t(k) + truth.center.y - s * r_p(k) - pred.center.y;
    }
    return res;
}

} // namespace

ThetaMatrix theta_matrix(int k, const BasisSpec& basis) {
    if (k < 1) throw std::invalid_argument("theta_matrix: need at least one angle");
    ThetaMatrix theta;
    theta.basis = basis;
    theta.angles.resize(k);
    for (int i = 0; i < k; ++i) theta.angles[i] = 2.0 * std::numbers::pi * i / k;
    theta.rows = design_matrix(theta.angles, basis);
    return theta;
}

double boundary_loss(const ContourModel& truth, const ContourModel& pred,
                     const ThetaMatrix& theta) {
    check_compatible(truth, pred, theta);
    const Residuals res = residuals(truth, pred, theta);
    return res.ex.squaredNorm() + res.ey.squaredNorm();
}

double boundary_loss_batch(
    const std::vector<std::pair<ContourModel, ContourModel>>& pairs,
    const ThetaMatrix& theta) {
    if (pairs.empty()) throw std::invalid_argument("boundary_loss_batch: empty batch");
    double sum = 0.0;
    for (const auto& [truth, pred] : pairs) sum += boundary_loss(truth, pred, theta);
    return sum / static_cast<double>(pairs.size());
}

BoundaryGradient boundary_loss_grad(const ContourModel& truth, const ContourModel& pred,
                                    const ThetaMatrix& theta) {
    check_compatible(truth, pred, theta);
    const Residuals res = residuals(truth, pred, theta);

    // d e_x(k) / d beta*_j = -cos(t_k) Theta_kj, d e_x(k) / d c*_x = -1,
    // and analogously for e_y; chain rule through the squared sums.
    Eigen::VectorXd weighted(theta.k());
    for (int k = 0; k < theta.k(); ++k)
        weighted(k) = res.ex(k) * std::cos(theta.angles[k]) +
                      res.ey(k) * std::sin(theta.angles[k]);
    const Eigen::VectorXd grad_beta = -2.0 * theta.rows.transpose() * weighted;

    BoundaryGradient grad;
    grad.beta.assign(grad_beta.data(), grad_beta.data() + grad_beta.size());
    grad.center_x = -2.0 * res.ex.sum();
    grad.center_y = -2.0 * res.ey.sum();
    return grad;
}

DescentResult fit_by_descent(const PointSet& target, std::optional<Point> center_init,
                             const DescentOptions& options) {
    if (target.empty()) throw std::invalid_argument("fit_by_descent: empty target");
    if (options.steps < 0 || options.rate <= 0)
        throw std::invalid_argument("fit_by_descent: invalid steps or rate");

    Point center = center_init.value_or([&] {
        Point c{0, 0};
        for (const Point& p : target) {
            c.x += p.x;
            c.y += p.y;
        }
        c.x /= static_cast<double>(target.size());
        c.y /= static_cast<double>(target.size());
        return c;
    }());

    const BasisSpec basis = basis_exponents(options.n);
    const ThetaMatrix theta = theta_matrix(options.k, basis);

    ContourModel reference;
    reference.n = options.n;
    reference.center = center;
    reference.beta = fit_contour(contour_to_polar(target, center), basis);

    ContourModel iterate;
    iterate.n = options.n;
    iterate.center = center;
    if (options.beta_init.empty()) {
        iterate.beta.assign(basis.exponents.size(), 0.0);
    } else {
        if (options.beta_init.size() != basis.exponents.size())
            throw std::invalid_argument("fit_by_descent: beta_init length mismatch");
        iterate.beta = options.beta_init;
    }

    DescentResult result;
    result.model = iterate;
    result.loss = boundary_loss(reference, iterate, theta);

    double prev_loss = result.loss;
    int rising_streak = 0;
    for (int step = 0; step < options.steps; ++step) {
        const BoundaryGradient grad = boundary_loss_grad(reference, iterate, theta);
        for (std::size_t j = 0; j < iterate.beta.size(); ++j)
            iterate.beta[j] -= options.rate * grad.beta[j];
        iterate.center.x -= options.rate * grad.center_x;
        iterate.center.y -= options.rate * grad.center_y;

        const double loss = boundary_loss(reference, iterate, theta);
        result.steps_run = step + 1;
        if (loss < result.loss) {
            result.loss = loss;
            result.model = iterate;
        }
        if (loss > prev_loss) {
            if (++rising_streak >= 10) {
                result.diverged = true;
                break;
            }
        } else {
            rising_streak = 0;
        }
        if (prev_loss - loss >= 0 && prev_loss - loss < options.min_improvement) break;
        prev_loss = loss;
    }
    return result;
}

} // namespace fundus
