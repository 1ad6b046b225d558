#include "treefanova/attribution.hpp"

#include <cmath>

#include "treefanova/errors.hpp"

namespace treefanova {

Attribution attribute_local(const FanovaModel& model, std::span<const double> x) {
    Attribution out;
    out.intercept = model.intercept;
    out.feature_contributions.assign(model.n_features(), 0.0);
    out.prediction = model.intercept;

    std::vector<double> sub;
    for (const auto& [tuple, eff] : model.effects) {
        sub.clear();
        for (int f : tuple) sub.push_back(x[static_cast<std::size_t>(f)]);
        const double value = eff.value_at(sub);
        out.effect_contributions[tuple] = value;
        out.prediction += value;
        const double share = value / static_cast<double>(tuple.size());
        for (int f : tuple) out.feature_contributions[static_cast<std::size_t>(f)] += share;
    }
    return out;
}

std::vector<double> shapley_oracle(const FanovaModel& model, std::span<const double> x) {
    const std::size_t p = model.n_features();
    if (p > 12)
        throw ConfigError("shapley_oracle enumerates 2^p coalitions; p = " + std::to_string(p) +
                          " is too large (max 12)");

    // factorials up to 12! are exact in double
    std::vector<double> fact(p + 1, 1.0);
    for (std::size_t k = 1; k <= p; ++k) fact[k] = fact[k - 1] * static_cast<double>(k);

    // per-effect value at x, with the tuple as a bitmask
    std::vector<std::pair<std::uint32_t, double>> terms;
    std::vector<double> sub;
    for (const auto& [tuple, eff] : model.effects) {
        std::uint32_t mask = 0;
        sub.clear();
        for (int f : tuple) {
            mask |= 1u << static_cast<unsigned>(f);
            sub.push_back(x[static_cast<std::size_t>(f)]);
        }
        terms.emplace_back(mask, eff.value_at(sub));
    }

    // v(S) - v(empty) for every coalition
    const std::uint32_t n_sets = 1u << p;
    std::vector<double> v(n_sets, 0.0);
    for (std::uint32_t s = 0; s < n_sets; ++s)
        for (const auto& [mask, value] : terms)
            if ((mask & s) == mask) v[s] += value;

    std::vector<double> phi(p, 0.0);
    for (std::size_t j = 0; j < p; ++j) {
        const std::uint32_t bit = 1u << j;
        for (std::uint32_t s = 0; s < n_sets; ++s) {
            if (s & bit) continue;
            const int size = std::popcount(s);
            const double weight = fact[static_cast<std::size_t>(size)] *
                                  fact[p - static_cast<std::size_t>(size) - 1] / fact[p];
            phi[j] += weight * (v[s | bit] - v[s]);
        }
    }
    return phi;
}

ImportanceReport global_importance(const FanovaModel& model, const Dataset& data) {
    const std::size_t n = data.n_rows();
    if (n < 2) throw ConfigError("global_importance requires at least 2 samples");
    const std::size_t p = model.n_features();

    ImportanceReport report;
    report.n_samples = n;

    std::map<FeatureTuple, std::vector<double>> effect_samples;
    for (const auto& [tuple, eff] : model.effects)
        effect_samples[tuple] = std::vector<double>(n, 0.0);
    std::vector<std::vector<double>> z(p, std::vector<double>(n, 0.0));

    std::vector<double> sub;
    for (std::size_t i = 0; i < n; ++i) {
        for (const auto& [tuple, eff] : model.effects) {
            sub.clear();
            for (int f : tuple) sub.push_back(data.columns[static_cast<std::size_t>(f)][i]);
            const double value = eff.value_at(sub);
            effect_samples[tuple][i] = value;
            const double share = value / static_cast<double>(tuple.size());
            for (int f : tuple) z[static_cast<std::size_t>(f)][i] += share;
        }
    }

    double effect_total = 0.0;
    for (const auto& [tuple, samples] : effect_samples) {
        const double v = variance(samples);
        report.effect_importance[tuple] = v;
        effect_total += v;
    }
    if (effect_total > 0.0)
        for (auto& [tuple, v] : report.effect_importance) v /= effect_total;
    else
        for (auto& [tuple, v] : report.effect_importance) v = 0.0;

    report.feature_importance.assign(p, 0.0);
    double feature_total = 0.0;
    for (std::size_t j = 0; j < p; ++j) {
        report.feature_importance[j] = variance(z[j]);
        feature_total += report.feature_importance[j];
    }
    if (feature_total > 0.0)
        for (auto& v : report.feature_importance) v /= feature_total;
    else
        for (auto& v : report.feature_importance) v = 0.0;

    return report;
}

}  // namespace treefanova
