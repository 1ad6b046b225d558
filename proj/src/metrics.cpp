#include "treefanova/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace treefanova {

double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

double mean(std::span<const double> v) {
    if (v.empty()) return 0.0;
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
}

double variance(std::span<const double> v) {
    if (v.empty()) return 0.0;
    const double m = mean(v);
    double s = 0.0;
    for (double x : v) s += (x - m) * (x - m);
    return s / static_cast<double>(v.size());
}

double rmse(std::span<const double> pred, std::span<const double> truth) {
    double s = 0.0;
    for (std::size_t i = 0; i < pred.size(); ++i) {
        const double d = pred[i] - truth[i];
        s += d * d;
    }
    return std::sqrt(s / static_cast<double>(pred.size()));
}

double r_squared(std::span<const double> pred, std::span<const double> truth) {
    const double m = mean(truth);
    double sse = 0.0, sst = 0.0;
    for (std::size_t i = 0; i < pred.size(); ++i) {
        sse += (truth[i] - pred[i]) * (truth[i] - pred[i]);
        sst += (truth[i] - m) * (truth[i] - m);
    }
    if (sst == 0.0) return sse == 0.0 ? 1.0 : 0.0;
    return 1.0 - sse / sst;
}

double auc(std::span<const double> score, std::span<const double> label) {
    const std::size_t n = score.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return score[a] < score[b]; });

    // average ranks over tied scores
    std::vector<double> rank(n);
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j + 1 < n && score[order[j + 1]] == score[order[i]]) ++j;
        const double avg = 0.5 * static_cast<double>(i + j) + 1.0;  // 1-based
        for (std::size_t k = i; k <= j; ++k) rank[order[k]] = avg;
        i = j + 1;
    }

    double rank_pos = 0.0;
    std::size_t n_pos = 0;
    for (std::size_t k = 0; k < n; ++k) {
        if (label[k] > 0.5) {
            rank_pos += rank[k];
            ++n_pos;
        }
    }
    const std::size_t n_neg = n - n_pos;
    if (n_pos == 0 || n_neg == 0) return 0.5;
    const double u = rank_pos - 0.5 * static_cast<double>(n_pos) * static_cast<double>(n_pos + 1);
    return u / (static_cast<double>(n_pos) * static_cast<double>(n_neg));
}

double log_loss(std::span<const double> raw_score, std::span<const double> label) {
    double s = 0.0;
    for (std::size_t i = 0; i < raw_score.size(); ++i) {
        const double z = raw_score[i];
        // log(1 + e^z) computed stably
        const double softplus = z > 0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z));
        s += softplus - label[i] * z;
    }
    return s / static_cast<double>(raw_score.size());
}

}  // namespace treefanova
