#pragma once

#include <map>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "treefanova/dataset.hpp"
#include "treefanova/ensemble.hpp"

namespace treefanova {

using FeatureTuple = std::vector<int>;  // sorted ascending, size 1..3

std::string tuple_label(const FeatureTuple& t, const std::vector<std::string>& names);

// Dense piecewise-constant effect over the grid induced by its split points.
// Cell i on an axis covers [split[i-1], split[i]); end cells are unbounded.
// `values` and `weights` are row-major with the last feature varying fastest.
struct EffectTensor {
    FeatureTuple features;
    std::vector<std::vector<double>> axes;  // per feature, strictly increasing
    std::vector<double> values;
    std::vector<double> weights;  // nonneg cell masses, same shape

    std::vector<std::size_t> shape() const;
    std::size_t cell_count() const;
    std::size_t arity() const { return features.size(); }
    // Cell index per axis for sub-vector x (one entry per feature, in order).
    std::vector<std::size_t> cell_of(std::span<const double> x_sub) const;
    double value_at(std::span<const double> x_sub) const;
    double max_abs_value() const;
    void check_consistent() const;  // throws ModelError
};

// Per-feature grid metadata carried alongside the effects so cell masses can
// be recomputed on any axis refinement: full split grid, per-bin sample
// counts and the observed data range.
struct FeatureDomain {
    std::vector<double> splits;
    std::vector<double> masses;  // size splits.size()+1
    double lo = 0.0;
    double hi = 0.0;
    bool known = false;
};

enum class Weighting { uniform, empirical };

Weighting weighting_from_string(const std::string& s);
std::string to_string(Weighting w);

struct FanovaModel {
    double intercept = 0.0;
    std::map<FeatureTuple, EffectTensor> effects;
    Link link = Link::identity;
    std::vector<std::string> feature_names;
    int max_arity = 3;
    std::vector<FeatureDomain> domains;  // per feature; may be empty

    std::size_t n_features() const { return feature_names.size(); }
};

// Mass of the half-open cell [lo, hi) on one feature under the given
// weighting. uniform = overlap length with the observed range; empirical =
// sum of bin counts inside. Unknown domains fall back to counting measure.
double cell_mass(const FeatureDomain& domain, double lo, double hi, Weighting w);

// Per-cell masses along an axis (cells = axis.size()+1).
std::vector<double> axis_masses(const FeatureDomain& domain, const std::vector<double>& axis,
                                Weighting w);

// Rearranges leaf rules into raw effect tensors keyed by the rule's feature
// set; intercept-style rules and base_score accumulate into the intercept.
// Throws ModelError if any rule has arity > 3.
FanovaModel aggregate(const Ensemble& model);

struct PurifyOptions {
    Weighting weighting = Weighting::uniform;
    double tol = 1e-10;
    int max_iter = 100;
};

struct PurifyResult {
    FanovaModel model;
    double max_residual = 0.0;  // largest slice mean left behind
    bool converged = true;
};

// Recursive re-centering: descending arity, each dimension's weighted slice
// means move into the child effect until the sweep change drops below tol;
// main-effect means move into the intercept. Predictions are unchanged.
PurifyResult purify(const FanovaModel& model, const PurifyOptions& options = {});

double evaluate(const FanovaModel& model, std::span<const double> x);
std::vector<double> evaluate(const FanovaModel& model, const Dataset& data);

// Diagnostics. max_slice_mean: largest |weighted mean| over all effects,
// axes and slices. effect_inner_product: normalized product-measure inner
// product of two effects on their common axis refinement.
double max_slice_mean(const FanovaModel& model, Weighting w);
double effect_inner_product(const FanovaModel& model, const FeatureTuple& a,
                            const FeatureTuple& b, Weighting w);

nlohmann::ordered_json fanova_to_json(const FanovaModel& model);
FanovaModel fanova_from_json(const nlohmann::json& j);

}  // namespace treefanova
