#pragma once

#include <cstdint>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "treefanova/dataset.hpp"
#include "treefanova/fanova.hpp"

namespace treefanova {

// Per-sample effect outputs as a design matrix, one centered column per effect.
struct EffectDesign {
    std::vector<std::vector<double>> columns;  // column-major, exactly centered
    std::vector<double> col_means;             // subtracted centers
    std::vector<FeatureTuple> tuples;          // column -> effect
    std::vector<double> target;
    Task task = Task::regression;
    double model_intercept = 0.0;

    std::size_t n_rows() const { return target.size(); }
    std::size_t n_cols() const { return columns.size(); }
};

EffectDesign build_design(const FanovaModel& model, const Dataset& data);

struct PathEntry {
    double lambda = 0.0;
    int n_selected = 0;
    double cv_metric = 0.0;  // mean CV R^2 (regression) or AUC (binary)
    bool converged = true;
};

// Log-spaced grid from lambda_max (smallest all-zero lambda) down to
// 1e-4 * lambda_max.
std::vector<double> default_lambda_grid(const EffectDesign& design, int count = 50);

// Full-data L1 fit at one lambda: cyclic coordinate descent (regression) or
// proximal Newton with coordinate descent on the quadratic bound (binary).
// Returns per-column coefficients; intercept is implicit.
std::vector<double> lasso_fit(const EffectDesign& design, double lambda,
                              bool* converged = nullptr);

std::vector<PathEntry> lasso_path(const EffectDesign& design,
                                  const std::vector<double>& lambdas, int folds,
                                  std::uint64_t seed);

// Mean CV metric of an unregularized GLM on the given columns (R^2 or AUC).
double cv_glm_metric(const EffectDesign& design, const std::vector<std::size_t>& cols,
                     int folds, std::uint64_t seed);

// Forward-backward selection with early dropping: k forward rounds, each
// filtering out candidates whose CV gain <= threshold, then one backward
// pass removing selected effects whose conditional gain <= threshold.
std::vector<std::size_t> fbed(const EffectDesign& design, std::vector<std::size_t> init,
                              int k, double threshold, int folds, std::uint64_t seed);

struct PruneConfig {
    // NaN selects lambda automatically: sparsest grid point whose CV metric
    // is within `slack` of the path maximum. +inf forces an intercept-only model.
    double lambda = std::numeric_limits<double>::quiet_NaN();
    double slack = 0.01;
    int k = 2;
    double threshold = 0.001;
    int folds = 5;
    int n_lambdas = 50;
    std::uint64_t seed = 0;
};

struct PruneResult {
    std::vector<FeatureTuple> selected;
    std::vector<double> coefficients;  // per selected effect
    double refit_intercept = 0.0;      // on the link scale, centers folded in
    double cv_metric = 0.0;            // CV metric of the final selection
    std::vector<PathEntry> path;
    bool intercept_only = false;
    std::string warning;
};

// Hybrid pipeline: Lasso rough selection, FBEDk fine-tuning, unregularized
// GLM refit. The pruned model keeps the selected effects scaled by the refit
// coefficients; shapes are untouched.
std::pair<FanovaModel, PruneResult> prune(const FanovaModel& model, const Dataset& data,
                                          const PruneConfig& cfg);

nlohmann::ordered_json prune_result_to_json(const PruneResult& result,
                                            const std::vector<std::string>& feature_names);

}  // namespace treefanova
