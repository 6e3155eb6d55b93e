#include "fundus/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <stdexcept>

#include <json.hpp>

namespace fundus {

namespace {

double clamp_score(double s) { return std::clamp(s, kScoreClamp, 1.0 - kScoreClamp); }

} // namespace

double bce(const std::vector<LabeledScore>& scores) {
    if (scores.empty()) throw std::invalid_argument("bce: empty input");
    double sum = 0.0;
    for (const auto& [score, label] : scores) {
        const double s = clamp_score(score);
        sum += label * std::log(s) + (1 - label) * std::log(1.0 - s);
    }
    return -sum / static_cast<double>(scores.size());
}

double categorical_ce(const Raster& truth, const Raster& pred) {
    if (truth.is_u8() || pred.is_u8())
        throw std::invalid_argument("categorical_ce: float rasters required");
    if (!truth.same_shape(pred))
        throw std::invalid_argument("categorical_ce: shape mismatch");
    const int channels = truth.channels();
    double sum = 0.0;
    for (int y = 0; y < truth.height(); ++y)
        for (int x = 0; x < truth.width(); ++x) {
            double norm = 0.0;
            for (int c = 0; c < channels; ++c) norm += pred.atf(y, x, c);
            if (std::abs(norm - 1.0) > 1e-5)
                throw std::invalid_argument(
                    "categorical_ce: prediction channels do not sum to 1");
            for (int c = 0; c < channels; ++c)
                sum += truth.atf(y, x, c) * std::log(clamp_score(pred.atf(y, x, c)));
        }
    return -sum / (static_cast<double>(truth.height()) * truth.width());
}

double fovea_distance(const PointSet& truth, const PointSet& pred) {
    if (truth.size() != pred.size())
        throw std::invalid_argument("fovea_distance: point count mismatch");
    if (truth.empty()) throw std::invalid_argument("fovea_distance: empty input");
    double sum = 0.0;
    for (std::size_t i = 0; i < truth.size(); ++i) sum += distance(truth[i], pred[i]);
    return sum / static_cast<double>(truth.size());
}

double mean_euclidean(const PointSet& truth, const PointSet& pred) {
    return fovea_distance(truth, pred);
}

double dice(const Raster& a, const Raster& b) {
    if (!a.is_binary_mask() || !b.is_binary_mask())
        throw std::invalid_argument("dice: binary masks required");
    if (!a.same_shape(b)) throw std::invalid_argument("dice: dimension mismatch");
    long long fg_a = 0, fg_b = 0, overlap = 0;
    const auto& da = a.bytes();
    const auto& db = b.bytes();
    for (std::size_t i = 0; i < da.size(); ++i) {
        const bool in_a = da[i] == kMaskForeground;
        const bool in_b = db[i] == kMaskForeground;
        fg_a += in_a;
        fg_b += in_b;
        overlap += in_a && in_b;
    }
    if (fg_a + fg_b == 0) return 1.0;
    return 2.0 * static_cast<double>(overlap) / static_cast<double>(fg_a + fg_b);
}

double f1(const std::vector<int>& truth, const std::vector<int>& pred) {
    if (truth.size() != pred.size())
        throw std::invalid_argument("f1: length mismatch");
    long long tp = 0, fp = 0, fn = 0;
    for (std::size_t i = 0; i < truth.size(); ++i) {
        tp += truth[i] == 1 && pred[i] == 1;
        fp += truth[i] == 0 && pred[i] == 1;
        fn += truth[i] == 1 && pred[i] == 0;
    }
    const double denom = static_cast<double>(2 * tp + fp + fn);
    if (denom == 0.0) return 0.0;
    return 2.0 * static_cast<double>(tp) / denom;
}

double auc_roc(const std::vector<LabeledScore>& scores) {
    long long positives = 0, negatives = 0;
    for (const auto& s : scores) (s.label == 1 ? positives : negatives) += 1;
    if (positives == 0 || negatives == 0)
        throw std::invalid_argument("auc_roc: both classes required");

    // Mann-Whitney through mid-ranks: ties inside a score group share
    // the average rank, which yields the half-credit convention.
    std::vector<std::size_t> order(scores.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return scores[a].score < scores[b].score;
    });
    double rank_sum_pos = 0.0;
    std::size_t i = 0;
    while (i < order.size()) {
        std::size_t j = i;
        while (j < order.size() && scores[order[j]].score == scores[order[i]].score) ++j;
        const double mid_rank = (static_cast<double>(i + 1) + static_cast<double>(j)) / 2.0;
        for (std::size_t t = i; t < j; ++t)
            if (scores[order[t]].label == 1) rank_sum_pos += mid_rank;
        i = j;
    }
    const double n_pos = static_cast<double>(positives);
    const double n_neg = static_cast<double>(negatives);
    return (rank_sum_pos - n_pos * (n_pos + 1.0) / 2.0) / (n_pos * n_neg);
}

void EvalReport::write_json(const std::filesystem::path& path) const {
    nlohmann::json j{{"items", items}, {"metrics", values}};
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw std::runtime_error(path.string() + ": cannot open for writing");
    out << j.dump(2) << '\n';
}

void EvalReport::write_csv(const std::filesystem::path& path) const {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw std::runtime_error(path.string() + ": cannot open for writing");
    out << "items";
    for (const auto& [name, _] : values) out << ',' << name;
    out << '\n' << items;
    out.precision(6);
    out << std::fixed;
    for (const auto& [_, value] : values) out << ',' << value;
    out << '\n';
}

} // namespace fundus
