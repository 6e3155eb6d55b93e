#include "fundus/polar_contour.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <fstream>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace fundus {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

void check_model(const ContourModel& model) {
    const std::size_t expected = static_cast<std::size_t>(model.n + 1) * (model.n + 1);
    if (model.n < 0 || model.beta.size() != expected)
        throw std::invalid_argument("contour model: beta length does not match basis order");
    for (double b : model.beta)
        if (!std::isfinite(b)) throw std::invalid_argument("contour model: non-finite coefficient");
}

} // namespace

BasisSpec basis_exponents(int n) {
    if (n < 0) throw std::invalid_argument("basis_exponents: order must be >= 0");
    BasisSpec basis;
    basis.n = n;
    basis.exponents.reserve(static_cast<std::size_t>(n + 1) * (n + 1));
    for (int c = 0; c <= n; ++c)
        for (int s = 0; s <= n; ++s) basis.exponents.emplace_back(c, s);
    return basis;
}

PolarSamples contour_to_polar(const PointSet& points, Point center) {
    PolarSamples out;
    out.angles.reserve(points.size());
    out.radii.reserve(points.size());
    for (const Point& p : points) {
        const double dx = p.x - center.x;
        const double dy = p.y - center.y;
        const double r = std::hypot(dx, dy);
        if (r < 1e-12)
            throw std::invalid_argument("contour_to_polar: point coincides with center");
        double theta = std::atan2(dy, dx);
        if (theta < 0) theta += kTwoPi;
        out.angles.push_back(theta);
        out.radii.push_back(r);
    }
    return out;
}

Eigen::RowVectorXd design_row(double angle, const BasisSpec& basis) {
    const int n = basis.n;
    std::vector<double> cpow(n + 1, 1.0), spow(n + 1, 1.0);
    const double c = std::cos(angle), s = std::sin(angle);
    for (int i = 1; i <= n; ++i) {
        cpow[i] = cpow[i - 1] * c;
        spow[i] = spow[i - 1] * s;
    }
    Eigen::RowVectorXd row(basis.size());
    for (int k = 0; k < basis.size(); ++k)
        row(k) = cpow[basis.exponents[k].first] * spow[basis.exponents[k].second];
    return row;
}

Eigen::MatrixXd design_matrix(const std::vector<double>& angles, const BasisSpec& basis) {
    Eigen::MatrixXd x(angles.size(), basis.size());
    for (std::size_t i = 0; i < angles.size(); ++i) {
        if (!std::isfinite(angles[i]))
            throw std::invalid_argument("design_matrix: non-finite angle");
        x.row(static_cast<Eigen::Index>(i)) = design_row(angles[i], basis);
    }
    return x;
}

std::vector<double> fit_contour(const PolarSamples& samples, const BasisSpec& basis) {
    if (samples.angles.empty())
        throw std::invalid_argument("fit_contour: at least one sample required");
    if (samples.angles.size() != samples.radii.size())
        throw std::invalid_argument("fit_contour: angle/radius count mismatch");
    for (double r : samples.radii)
        if (!std::isfinite(r)) throw std::invalid_argument("fit_contour: non-finite radius");

    const Eigen::MatrixXd x = design_matrix(samples.angles, basis);
    const Eigen::VectorXd y =
        Eigen::Map<const Eigen::VectorXd>(samples.radii.data(), samples.radii.size());

    Eigen::BDCSVD<Eigen::MatrixXd> svd(x, Eigen::ComputeThinU | Eigen::ComputeThinV);
    svd.setThreshold(1e-10);
    const Eigen::VectorXd beta = svd.solve(y);
    return {beta.data(), beta.data() + beta.size()};
}

double radius_at(const ContourModel& model, double theta) {
    check_model(model);
    const BasisSpec basis = basis_exponents(model.n);
    const Eigen::RowVectorXd row = design_row(theta, basis);
    double r = 0.0;
    for (int k = 0; k < basis.size(); ++k) r += row(k) * model.beta[k];
    return r;
}

ReconstructedContour reconstruct_contour(const ContourModel& model, int k) {
    check_model(model);
    if (k < 3) throw std::invalid_argument("reconstruct_contour: need at least 3 angles");
    const BasisSpec basis = basis_exponents(model.n);
    ReconstructedContour out;
    out.points.reserve(k);
    for (int i = 0; i < k; ++i) {
        const double theta = kTwoPi * i / k;
        const Eigen::RowVectorXd row = design_row(theta, basis);
        double r = 0.0;
        for (int j = 0; j < basis.size(); ++j) r += row(j) * model.beta[j];
        if (r < 0) {
            r = 0;
            out.clamped = true;
        }
        out.points.push_back({model.center.x + r * std::cos(theta),
                              model.center.y + r * std::sin(theta)});
    }
    return out;
}

namespace {

bool is_foreground(const Raster& mask, int x, int y) {
    if (x < 0 || y < 0 || x >= mask.width() || y >= mask.height()) return false;
    return mask.at8(y, x) == kMaskForeground;
}

// Clockwise Moore neighborhood in image coordinates (y down),
// starting west: W, NW, N, NE, E, SE, S, SW.
constexpr int kNbrX[8] = {-1, -1, 0, 1, 1, 1, 0, -1};
constexpr int kNbrY[8] = {0, -1, -1, -1, 0, 1, 1, 1};

} // namespace

ExtractedContour extract_contour(const Raster& mask) {
    if (!mask.is_binary_mask())
        throw std::invalid_argument("extract_contour: binary single-channel mask required");

    // Find the start pixel and the foreground centroid; verify a single
    // 4-connected component along the way.
    long long fg_count = 0;
    double sum_x = 0, sum_y = 0;
    int start_x = -1, start_y = -1;
    for (int y = 0; y < mask.height(); ++y)
        for (int x = 0; x < mask.width(); ++x)
            if (is_foreground(mask, x, y)) {
                if (start_x < 0) {
                    start_x = x;
                    start_y = y;
                }
                ++fg_count;
                sum_x += x;
                sum_y += y;
            }
    if (fg_count == 0) throw std::invalid_argument("extract_contour: empty mask");

    std::vector<char> seen(mask.sample_count(), 0);
    std::deque<std::pair<int, int>> queue{{start_x, start_y}};
    seen[static_cast<std::size_t>(start_y) * mask.width() + start_x] = 1;
    long long reached = 0;
    while (!queue.empty()) {
        auto [x, y] = queue.front();
        queue.pop_front();
        ++reached;
        const int nx[4] = {x - 1, x + 1, x, x};
        const int ny[4] = {y, y, y - 1, y + 1};
        for (int i = 0; i < 4; ++i)
            if (is_foreground(mask, nx[i], ny[i])) {
                auto& flag = seen[static_cast<std::size_t>(ny[i]) * mask.width() + nx[i]];
                if (!flag) {
                    flag = 1;
                    queue.emplace_back(nx[i], ny[i]);
                }
            }
    }
    if (reached != fg_count)
        throw std::invalid_argument("extract_contour: multiple foreground components");

    ExtractedContour out;
    out.center = {sum_x / fg_count, sum_y / fg_count};
    out.boundary.push_back({static_cast<double>(start_x), static_cast<double>(start_y)});

    // Moore-neighbor tracing, clockwise. The raster scan reached the
    // start pixel from the west, so the initial backtrack pixel is its
    // west neighbor. The trace stops when it is about to repeat its
    // first move out of the start pixel.
    const auto ring_index = [](int dx, int dy) {
        for (int i = 0; i < 8; ++i)
            if (kNbrX[i] == dx && kNbrY[i] == dy) return i;
        return -1;
    };

    int px = start_x, py = start_y;
    int prev_x = start_x - 1, prev_y = start_y;
    int first_cx = -1, first_cy = -1;
    const std::size_t max_steps = mask.sample_count() * 4 + 16;
    for (std::size_t steps = 0;; ++steps) {
        if (steps >= max_steps)
            throw std::runtime_error("extract_contour: tracing failed to terminate");
        const int start_ring = ring_index(prev_x - px, prev_y - py);
        int found = -1;
        for (int step = 1; step <= 8; ++step) {
            const int dir = (start_ring + step) % 8;
            const int nx = px + kNbrX[dir], ny = py + kNbrY[dir];
            if (is_foreground(mask, nx, ny)) {
                found = dir;
                break;
            }
            prev_x = nx; // last background pixel examined
            prev_y = ny;
        }
        if (found < 0) break; // isolated single pixel
        const int cx = px + kNbrX[found], cy = py + kNbrY[found];
        if (px == start_x && py == start_y) {
            if (first_cx < 0) {
                first_cx = cx;
                first_cy = cy;
            } else if (cx == first_cx && cy == first_cy) {
                break; // boundary closed
            }
        }
        if (!(cx == start_x && cy == start_y))
            out.boundary.push_back({static_cast<double>(cx), static_cast<double>(cy)});
        px = cx;
        py = cy;
    }
    return out;
}

RasterizedContour rasterize_contour(const PointSet& points, int height, int width) {
    if (points.size() < 3)
        throw std::invalid_argument("rasterize_contour: need at least 3 points");
    if (height < 1 || width < 1)
        throw std::invalid_argument("rasterize_contour: invalid raster size");

    RasterizedContour out{Raster::u8(height, width, 1, kMaskBackground), false};

    double area2 = 0.0; // shoelace, twice the signed area
    for (std::size_t i = 0; i < points.size(); ++i) {
        const Point& a = points[i];
        const Point& b = points[(i + 1) % points.size()];
        area2 += a.x * b.y - b.x * a.y;
    }
    if (std::abs(area2) < 1e-9) {
        out.degenerate = true;
        return out;
    }

    // Even-odd parity fill; a pixel is foreground when its center lies
    // inside or on the polygon (inclusive interval rounding).
    constexpr double kEps = 1e-9;
    std::vector<double> crossings;
    for (int y = 0; y < height; ++y) {
        crossings.clear();
        for (std::size_t i = 0; i < points.size(); ++i) {
            const Point& a = points[i];
            const Point& b = points[(i + 1) % points.size()];
            if ((a.y < y && b.y >= y) || (b.y < y && a.y >= y))
                crossings.push_back(a.x + (y - a.y) / (b.y - a.y) * (b.x - a.x));
        }
        std::sort(crossings.begin(), crossings.end());
        for (std::size_t i = 0; i + 1 < crossings.size(); i += 2) {
            const int from = std::max(0, static_cast<int>(std::ceil(crossings[i] - kEps)));
            const int to =
                std::min(width - 1, static_cast<int>(std::floor(crossings[i + 1] + kEps)));
            for (int x = from; x <= to; ++x) out.mask.at8(y, x) = kMaskForeground;
        }
    }

    // Boundary pass so edge pixels land in the mask (the fill rule above
    // skips rows lying exactly on horizontal edges).
    for (std::size_t i = 0; i < points.size(); ++i) {
        const Point& a = points[i];
        const Point& b = points[(i + 1) % points.size()];
        const int steps =
            std::max(1, static_cast<int>(std::ceil(std::max(std::abs(b.x - a.x),
                                                            std::abs(b.y - a.y)) * 2)));
        for (int s = 0; s <= steps; ++s) {
            const double t = static_cast<double>(s) / steps;
            const int x = static_cast<int>(std::lround(a.x + (b.x - a.x) * t));
            const int y = static_cast<int>(std::lround(a.y + (b.y - a.y) * t));
            if (x >= 0 && x < width && y >= 0 && y < height)
                out.mask.at8(y, x) = kMaskForeground;
        }
    }
    return out;
}

void write_contour_model(const std::filesystem::path& path, const ContourModel& model) {
    check_model(model);
    nlohmann::json j{{"n", model.n},
                     {"beta", model.beta},
                     {"center", {model.center.x, model.center.y}}};
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw std::runtime_error(path.string() + ": cannot open for writing");
    out << j.dump(2) << '\n';
}

ContourModel read_contour_model(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error(path.string() + ": cannot open");
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw std::runtime_error(path.string() + ": " + e.what());
    }
    ContourModel model;
    try {
        model.n = j.at("n").get<int>();
        model.beta = j.at("beta").get<std::vector<double>>();
        const auto center = j.at("center").get<std::vector<double>>();
        if (center.size() != 2) throw std::runtime_error("center must have 2 entries");
        model.center = {center[0], center[1]};
    } catch (const nlohmann::json::exception& e) {
        throw std::runtime_error(path.string() + ": " + e.what());
    }
    check_model(model);
    return model;
}

void write_point_csv(const std::filesystem::path& path, const PointSet& points) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw std::runtime_error(path.string() + ": cannot open for writing");
    out << "x,y\n";
    out.precision(17);
    for (const Point& p : points) out << p.x << ',' << p.y << '\n';
}

PointSet read_point_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error(path.string() + ": cannot open");
    std::string line;
    if (!std::getline(in, line) || line.rfind("x,y", 0) != 0)
        throw std::runtime_error(path.string() + ": missing x,y header");
    PointSet points;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        std::istringstream ss(line);
        Point p;
        char comma = 0;
        if (!(ss >> p.x >> comma >> p.y) || comma != ',')
            throw std::runtime_error(path.string() + ": bad point at line " +
                                     std::to_string(line_no));
        points.push_back(p);
    }
    return points;
}

} // namespace fundus
