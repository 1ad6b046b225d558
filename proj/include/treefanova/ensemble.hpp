#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "treefanova/dataset.hpp"

namespace treefanova {

enum class Link { identity, logit };

std::string to_string(Link link);
Link link_from_string(const std::string& s);

// Flat binary tree; nodes[0] is the root. A node is a leaf iff feature < 0.
// Routing: go left iff x[feature] < split, right otherwise.
struct TreeNode {
    int feature = -1;
    double split = 0.0;
    double value = 0.0;  // leaf value, unweighted
    int left = -1;
    int right = -1;

    bool is_leaf() const { return feature < 0; }
};

struct Tree {
    std::vector<TreeNode> nodes;

    double eval(std::span<const double> x) const;
    std::size_t n_leaves() const;
};

struct Ensemble {
    std::vector<Tree> trees;
    std::vector<double> weights;  // per-tree weight (learning rate)
    double base_score = 0.0;
    Link link = Link::identity;
    std::vector<std::string> feature_names;
    std::optional<BinGrid> bin_grid;  // grid used at training, if any

    std::size_t n_features() const { return feature_names.size(); }
    void validate() const;  // throws ModelError on broken invariants
};

// One leaf's decision path compiled to per-feature half-open intervals.
struct LeafRule {
    struct Interval {
        double lo;  // -inf allowed
        double hi;  // +inf allowed; covers [lo, hi)
    };
    double value = 0.0;                // leaf value * tree weight
    std::map<int, Interval> intervals; // features absent are unconstrained
    int tree_index = 0;
    bool unreachable = false;          // contradictory path (empty interval)

    bool matches(std::span<const double> x) const;
};

double predict_raw(const Ensemble& model, std::span<const double> x);
std::vector<double> predict_raw(const Ensemble& model, const Dataset& data);

// One rule per leaf, in tree order then depth-first (left before right).
// Unreachable leaves are flagged, not dropped.
std::vector<LeafRule> extract_leaf_rules(const Ensemble& model);

// Canonical JSON with fixed field order; round trips losslessly.
nlohmann::ordered_json ensemble_to_json(const Ensemble& model);
Ensemble ensemble_from_json(const nlohmann::json& j);
std::string serialize(const Ensemble& model);
Ensemble deserialize(const std::string& bytes);

// Import an externally trained GBM from the common JSON dump convention:
// either a bare array of nested tree nodes with fields
// {split, split_condition, yes, no, missing, children} / {leaf}, or an object
// {"objective": ..., "base_score": ..., "feature_names": [...],
//  "weights": [...], "trees": [...]}. The "missing" pointer must equal "yes".
Ensemble import_tree_dump(const std::string& path);
Ensemble import_tree_dump_json(const nlohmann::json& j);

}  // namespace treefanova
