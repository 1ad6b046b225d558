#include "treefanova/ensemble.hpp"

#include <cmath>
#include <fstream>
#include <limits>

#include "treefanova/errors.hpp"

namespace treefanova {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

std::string to_string(Link link) { return link == Link::identity ? "identity" : "logit"; }

Link link_from_string(const std::string& s) {
    if (s == "identity") return Link::identity;
    if (s == "logit") return Link::logit;
    throw ModelError("unknown link '" + s + "'");
}

double Tree::eval(std::span<const double> x) const {
    int i = 0;
    while (!nodes[static_cast<std::size_t>(i)].is_leaf()) {
        const TreeNode& nd = nodes[static_cast<std::size_t>(i)];
        i = x[static_cast<std::size_t>(nd.feature)] < nd.split ? nd.left : nd.right;
    }
    return nodes[static_cast<std::size_t>(i)].value;
}

std::size_t Tree::n_leaves() const {
    std::size_t n = 0;
    for (const auto& nd : nodes)
        if (nd.is_leaf()) ++n;
    return n;
}

void Ensemble::validate() const {
    if (trees.size() != weights.size())
        throw ModelError("ensemble has " + std::to_string(trees.size()) + " trees but " +
                         std::to_string(weights.size()) + " weights");
    if (!std::isfinite(base_score)) throw ModelError("base_score is not finite");
    const int p = static_cast<int>(feature_names.size());
    for (std::size_t k = 0; k < trees.size(); ++k) {
        if (!std::isfinite(weights[k])) throw ModelError("tree weight not finite");
        const auto& nodes = trees[k].nodes;
        if (nodes.empty()) throw ModelError("tree " + std::to_string(k) + " is empty");
        for (const auto& nd : nodes) {
            if (nd.is_leaf()) {
                if (!std::isfinite(nd.value))
                    throw ModelError("leaf value not finite in tree " + std::to_string(k));
            } else {
                if (nd.feature >= p)
                    throw ModelError("feature index " + std::to_string(nd.feature) +
                                     " out of range in tree " + std::to_string(k));
                if (!std::isfinite(nd.split))
                    throw ModelError("split value not finite in tree " + std::to_string(k));
                const int sz = static_cast<int>(nodes.size());
                if (nd.left < 0 || nd.right < 0 || nd.left >= sz || nd.right >= sz)
                    throw ModelError("child index out of range in tree " + std::to_string(k));
            }
        }
    }
}

bool LeafRule::matches(std::span<const double> x) const {
    for (const auto& [feature, iv] : intervals) {
        const double v = x[static_cast<std::size_t>(feature)];
        if (!(iv.lo <= v && v < iv.hi)) return false;
    }
    return true;
}

double predict_raw(const Ensemble& model, std::span<const double> x) {
    if (x.size() != model.n_features())
        throw ModelError("feature vector has " + std::to_string(x.size()) +
                         " entries, model expects " + std::to_string(model.n_features()));
    double out = model.base_score;
    for (std::size_t k = 0; k < model.trees.size(); ++k)
        out += model.weights[k] * model.trees[k].eval(x);
    return out;
}

std::vector<double> predict_raw(const Ensemble& model, const Dataset& data) {
    std::vector<double> out(data.n_rows());
    std::vector<double> x(data.n_features());
    for (std::size_t i = 0; i < data.n_rows(); ++i) {
        for (std::size_t j = 0; j < data.n_features(); ++j) x[j] = data.columns[j][i];
        out[i] = predict_raw(model, x);
    }
    return out;
}

namespace {

void collect_rules(const Tree& tree, int node, double weight, int tree_index,
                   std::map<int, LeafRule::Interval>& path, std::vector<LeafRule>& out) {
    const TreeNode& nd = tree.nodes[static_cast<std::size_t>(node)];
    if (nd.is_leaf()) {
        LeafRule rule;
        rule.value = nd.value * weight;
        rule.intervals = path;
        rule.tree_index = tree_index;
        for (const auto& [f, iv] : rule.intervals)
            if (!(iv.lo < iv.hi)) rule.unreachable = true;
        out.push_back(std::move(rule));
        return;
    }
    // left: x < split tightens the upper bound; right tightens the lower bound
    auto descend = [&](int child, bool is_left) {
        auto it = path.find(nd.feature);
        const bool had = it != path.end();
        const LeafRule::Interval saved = had ? it->second : LeafRule::Interval{-kInf, kInf};
        LeafRule::Interval next = saved;
        if (is_left)
            next.hi = std::min(next.hi, nd.split);
        else
            next.lo = std::max(next.lo, nd.split);
        path[nd.feature] = next;
        collect_rules(tree, child, weight, tree_index, path, out);
        if (had)
            path[nd.feature] = saved;
        else
            path.erase(nd.feature);
    };
    descend(nd.left, true);
    descend(nd.right, false);
}

}  // namespace

std::vector<LeafRule> extract_leaf_rules(const Ensemble& model) {
    std::vector<LeafRule> rules;
    std::map<int, LeafRule::Interval> path;
    for (std::size_t k = 0; k < model.trees.size(); ++k)
        collect_rules(model.trees[k], 0, model.weights[k], static_cast<int>(k), path, rules);
    return rules;
}

namespace {

nlohmann::ordered_json node_to_json(const Tree& tree, int i) {
    const TreeNode& nd = tree.nodes[static_cast<std::size_t>(i)];
    nlohmann::ordered_json j;
    if (nd.is_leaf()) {
        j["leaf"] = nd.value;
        return j;
    }
    j["feature"] = nd.feature;
    j["split"] = nd.split;
    j["left"] = node_to_json(tree, nd.left);
    j["right"] = node_to_json(tree, nd.right);
    return j;
}

int node_from_json(const nlohmann::json& j, Tree& tree) {
    const int idx = static_cast<int>(tree.nodes.size());
    tree.nodes.emplace_back();
    if (j.contains("leaf")) {
        tree.nodes[static_cast<std::size_t>(idx)].value = j.at("leaf").get<double>();
        return idx;
    }
    TreeNode nd;
    nd.feature = j.at("feature").get<int>();
    if (nd.feature < 0) throw ModelError("negative feature index in tree node");
    nd.split = j.at("split").get<double>();
    nd.value = 0.0;
    tree.nodes[static_cast<std::size_t>(idx)] = nd;
    const int left = node_from_json(j.at("left"), tree);
    const int right = node_from_json(j.at("right"), tree);
    tree.nodes[static_cast<std::size_t>(idx)].left = left;
    tree.nodes[static_cast<std::size_t>(idx)].right = right;
    return idx;
}

}  // namespace

nlohmann::ordered_json ensemble_to_json(const Ensemble& model) {
    nlohmann::ordered_json j;
    j["version"] = 1;
    j["link"] = to_string(model.link);
    j["base_score"] = model.base_score;
    j["feature_names"] = model.feature_names;
    j["trees"] = nlohmann::ordered_json::array();
    for (std::size_t k = 0; k < model.trees.size(); ++k) {
        nlohmann::ordered_json tj;
        tj["weight"] = model.weights[k];
        tj["root"] = node_to_json(model.trees[k], 0);
        j["trees"].push_back(std::move(tj));
    }
    if (model.bin_grid) j["bin_grid"] = bin_grid_to_json(*model.bin_grid);
    return j;
}

Ensemble ensemble_from_json(const nlohmann::json& j) {
    if (!j.contains("version")) throw ModelError("model JSON missing version");
    if (j.at("version").get<int>() != 1)
        throw ModelError("unsupported model version " + j.at("version").dump());
    Ensemble model;
    model.link = link_from_string(j.at("link").get<std::string>());
    model.base_score = j.at("base_score").get<double>();
    model.feature_names = j.at("feature_names").get<std::vector<std::string>>();
    for (const auto& tj : j.at("trees")) {
        model.weights.push_back(tj.at("weight").get<double>());
        Tree tree;
        node_from_json(tj.at("root"), tree);
        model.trees.push_back(std::move(tree));
    }
    if (j.contains("bin_grid")) model.bin_grid = bin_grid_from_json(j.at("bin_grid"));
    model.validate();
    return model;
}

std::string serialize(const Ensemble& model) { return ensemble_to_json(model).dump(2) + "\n"; }

Ensemble deserialize(const std::string& bytes) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(bytes);
    } catch (const nlohmann::json::exception& e) {
        throw ModelError(std::string("model JSON parse error: ") + e.what());
    }
    try {
        return ensemble_from_json(j);
    } catch (const nlohmann::json::exception& e) {
        throw ModelError(std::string("model JSON structure error: ") + e.what());
    }
}

namespace {

// Nodes in the common dump convention: internal nodes carry
// {split, split_condition, yes, no, missing, children}; leaves carry {leaf}.
int import_node(const nlohmann::json& j, Tree& tree,
                std::vector<std::string>& names, const std::string& where) {
    const int idx = static_cast<int>(tree.nodes.size());
    tree.nodes.emplace_back();
    if (j.contains("leaf")) {
        tree.nodes[static_cast<std::size_t>(idx)].value = j.at("leaf").get<double>();
        return idx;
    }
    if (!j.contains("split") || !j.contains("split_condition") || !j.contains("children"))
        throw ModelError("unknown node kind at " + where);

    // feature reference: "f<k>", a known name, or an integer
    int feature = -1;
    const auto& split_ref = j.at("split");
    if (split_ref.is_number_integer()) {
        feature = split_ref.get<int>();
        while (static_cast<int>(names.size()) <= feature)
            names.push_back("f" + std::to_string(names.size()));
    } else {
        const std::string name = split_ref.get<std::string>();
        for (std::size_t f = 0; f < names.size(); ++f)
            if (names[f] == name) feature = static_cast<int>(f);
        if (feature < 0 && name.size() > 1 && name[0] == 'f') {
            char* end = nullptr;
            const long k = std::strtol(name.c_str() + 1, &end, 10);
            if (end && *end == '\0' && k >= 0) {
                feature = static_cast<int>(k);
                while (static_cast<int>(names.size()) <= feature)
                    names.push_back("f" + std::to_string(names.size()));
                names[static_cast<std::size_t>(feature)] = name;
            }
        }
        if (feature < 0) {
            feature = static_cast<int>(names.size());
            names.push_back(name);
        }
    }

    const auto yes = j.at("yes").get<long long>();
    const auto no = j.at("no").get<long long>();
    if (j.contains("missing") && j.at("missing").get<long long>() != yes)
        throw ModelError("'missing' branch differs from 'yes' branch at " + where);
    const auto& children = j.at("children");
    if (!children.is_array() || children.size() != 2)
        throw ModelError("non-binary node at " + where);

    const nlohmann::json* yes_child = nullptr;
    const nlohmann::json* no_child = nullptr;
    for (const auto& c : children) {
        if (!c.contains("nodeid")) throw ModelError("child missing nodeid at " + where);
        const auto id = c.at("nodeid").get<long long>();
        if (id == yes) yes_child = &c;
        if (id == no) no_child = &c;
    }
    if (!yes_child || !no_child)
        throw ModelError("yes/no ids do not match children at " + where);

    TreeNode nd;
    nd.feature = feature;
    nd.split = j.at("split_condition").get<double>();
    tree.nodes[static_cast<std::size_t>(idx)] = nd;
    const int left = import_node(*yes_child, tree, names, where + "/children[yes]");
    const int right = import_node(*no_child, tree, names, where + "/children[no]");
    tree.nodes[static_cast<std::size_t>(idx)].left = left;
    tree.nodes[static_cast<std::size_t>(idx)].right = right;
    return idx;
}

}  // namespace

Ensemble import_tree_dump_json(const nlohmann::json& j) {
    Ensemble model;
    const nlohmann::json* trees = nullptr;
    std::vector<double> weights;
    if (j.is_array()) {
        trees = &j;
    } else if (j.is_object()) {
        if (!j.contains("trees")) throw ModelError("tree dump object has no 'trees' array");
        trees = &j.at("trees");
        if (j.contains("objective")) {
            const auto obj = j.at("objective").get<std::string>();
            model.link = obj.rfind("binary", 0) == 0 ? Link::logit : Link::identity;
        }
        if (j.contains("base_score")) model.base_score = j.at("base_score").get<double>();
        if (j.contains("feature_names"))
            model.feature_names = j.at("feature_names").get<std::vector<std::string>>();
        if (j.contains("weights")) weights = j.at("weights").get<std::vector<double>>();
    } else {
        throw ModelError("tree dump must be a JSON array or object");
    }
    if (!trees->is_array()) throw ModelError("'trees' is not an array");
    if (!weights.empty() && weights.size() != trees->size())
        throw ModelError("weights length does not match tree count");

    std::vector<std::string> names = model.feature_names;
    std::size_t k = 0;
    for (const auto& tj : *trees) {
        Tree tree;
        import_node(tj, tree, names, "trees[" + std::to_string(k) + "]");
        model.trees.push_back(std::move(tree));
        model.weights.push_back(weights.empty() ? 1.0 : weights[k]);
        ++k;
    }
    model.feature_names = std::move(names);
    model.validate();
    return model;
}

Ensemble import_tree_dump(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open tree dump '" + path + "'");
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ModelError("tree dump parse error in '" + path + "': " + e.what());
    }
    return import_tree_dump_json(j);
}

}  // namespace treefanova
