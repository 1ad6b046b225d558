#pragma once

#include <map>
#include <span>
#include <vector>

#include "treefanova/dataset.hpp"
#include "treefanova/fanova.hpp"

namespace treefanova {

struct Attribution {
    double intercept = 0.0;
    std::map<FeatureTuple, double> effect_contributions;
    std::vector<double> feature_contributions;  // z, length p
    double prediction = 0.0;                    // link scale
};

// Effect contribution = tensor value at x; feature contribution z_j = main
// effect plus 1/2 of each pair and 1/3 of each triple containing j.
Attribution attribute_local(const FanovaModel& model, std::span<const double> x);

// Brute-force Shapley values with coalition value
// v(S) = intercept + sum of effects whose features are inside S.
// Requires p <= 12; throws ConfigError otherwise.
std::vector<double> shapley_oracle(const FanovaModel& model, std::span<const double> x);

struct ImportanceReport {
    std::map<FeatureTuple, double> effect_importance;  // sums to 1 (or all 0)
    std::vector<double> feature_importance;            // sums to 1 (or all 0)
    std::size_t n_samples = 0;
};

// Importance = population variance of per-sample contributions, normalized.
// All-zero variances report zeros.
ImportanceReport global_importance(const FanovaModel& model, const Dataset& data);

}  // namespace treefanova
