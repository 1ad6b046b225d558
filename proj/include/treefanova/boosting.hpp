#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <utility>
#include <vector>

#include <json.hpp>

#include "treefanova/dataset.hpp"
#include "treefanova/ensemble.hpp"

namespace treefanova {

struct TrainConfig {
    int n_estimators = 500;
    double learning_rate = 0.1;
    int max_depth = 2;
    double l1 = 0.0;
    double l2 = 1.0;
    int max_bins = 32;
    // feature index -> +1 (nondecreasing) / -1 (nonincreasing); absent = 0.
    std::map<int, int> monotone;
    // When set, a split may only introduce a feature if the branch's feature
    // set plus that feature fits inside one of these sets.
    std::optional<std::vector<std::vector<int>>> interaction_allow;
    int early_stopping_rounds = 50;  // 0 disables early stopping
    int min_samples_leaf = 1;
    double min_gain = 0.0;
    std::uint64_t seed = 0;
    int n_threads = 1;

    void validate(std::size_t n_features) const;  // throws ConfigError
};

nlohmann::ordered_json train_config_to_json(const TrainConfig& cfg);
TrainConfig train_config_from_json(const nlohmann::json& j);

struct FitReport {
    std::vector<double> train_curve;  // per-round metric (RMSE or AUC)
    std::vector<double> valid_curve;  // empty when no validation set
    int best_round = -1;              // round index the model was truncated to
    double final_metric = 0.0;        // valid metric at best_round (train if no valid)
    int rounds_run = 0;
};

// Second-order histogram boosting with monotonicity / interaction / depth
// constraints. `valid` may be empty (n == 0) to disable early stopping.
std::pair<Ensemble, FitReport> fit(const Dataset& train, const Dataset& valid,
                                   const TrainConfig& cfg);

struct SearchSpace {
    std::array<int, 2> n_estimators{50, 3000};
    std::array<double, 2> learning_rate{0.01, 1.0};
    std::array<double, 2> l1{0.001, 1000.0};
    std::array<double, 2> l2{0.001, 1000.0};
    std::array<int, 2> max_bins{2, 200};
};

struct TrialRecord {
    TrainConfig config;
    double valid_metric = 0.0;
    int rounds_used = 0;  // best_round + 1
    bool failed = false;
};

struct SearchResult {
    TrainConfig best;
    std::size_t best_index = 0;
    std::vector<TrialRecord> trials;
};

// Random search: counts uniform, rates/regularization log-uniform. Fields not
// covered by the space (depth, constraints, ...) come from `base`. A failed
// trial scores worst-possible. Deterministic given seed.
SearchResult random_search(const Dataset& train, const Dataset& valid,
                           const SearchSpace& space, int n_trials, std::uint64_t seed,
                           const TrainConfig& base = {});

}  // namespace treefanova
