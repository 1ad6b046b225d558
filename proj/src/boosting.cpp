#include "treefanova/boosting.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <thread>

#include "treefanova/errors.hpp"
#include "treefanova/metrics.hpp"
#include "treefanova/rng.hpp"

namespace treefanova {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Runs fn(item) for item in [0, n); results must go to per-item slots.
void parallel_for(std::size_t n, int n_threads, const std::function<void(std::size_t)>& fn) {
    if (n_threads <= 1 || n <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    const std::size_t workers = std::min<std::size_t>(static_cast<std::size_t>(n_threads), n);
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errors(workers);
    for (std::size_t w = 0; w < workers; ++w) {
        pool.emplace_back([&, w] {
            try {
                for (std::size_t i = w; i < n; i += workers) fn(i);
            } catch (...) {
                errors[w] = std::current_exception();
            }
        });
    }
    for (auto& t : pool) t.join();
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

struct SplitCandidate {
    double gain = -kInf;
    int feature = -1;
    int bin = -1;
    double threshold = 0.0;
    double g_left = 0.0, h_left = 0.0;
    double g_right = 0.0, h_right = 0.0;
    double w_left = 0.0, w_right = 0.0;  // clipped would-be child values
};

struct NodeState {
    std::size_t begin = 0, end = 0;  // range in the sample index buffer
    double sum_g = 0.0, sum_h = 0.0;
    std::vector<int> path_features;  // sorted distinct features on the path
    double lo = -kInf, hi = kInf;    // monotone value bounds
    int tree_node = 0;
};

class TreeGrower {
public:
    TreeGrower(const BinGrid& grid, const std::vector<std::vector<std::uint16_t>>& binned,
               const TrainConfig& cfg)
        : grid_(grid), binned_(binned), cfg_(cfg), p_(binned.size()) {
        hist_g_.resize(p_);
        hist_h_.resize(p_);
        hist_c_.resize(p_);
        for (std::size_t j = 0; j < p_; ++j) {
            const std::size_t bins = grid_.features[j].splits.size() + 1;
            hist_g_[j].resize(bins);
            hist_h_[j].resize(bins);
            hist_c_[j].resize(bins);
        }
        index_.resize(binned.empty() ? 0 : binned[0].size());
        scratch_.resize(index_.size());
    }

    // Grows one tree on (g, h); fills leaf_value[i] with the tree's output
    // for every training sample.
    Tree grow(const std::vector<double>& g, const std::vector<double>& h,
              std::vector<double>& leaf_value) {
        const std::size_t n = g.size();
        for (std::size_t i = 0; i < n; ++i) index_[i] = i;

        Tree tree;
        tree.nodes.emplace_back();  // root placeholder

        NodeState root;
        root.begin = 0;
        root.end = n;
        for (std::size_t i = 0; i < n; ++i) {
            root.sum_g += g[i];
            root.sum_h += h[i];
        }
        std::vector<NodeState> level{root};

        for (int depth = 0; depth < cfg_.max_depth && !level.empty(); ++depth) {
            std::vector<NodeState> next;
            for (auto& node : level) {
                SplitCandidate best = find_best_split(node, g, h);
                if (best.feature < 0) {
                    finalize_leaf(tree, node);
                    continue;
                }
                apply_split(tree, node, best, next);
            }
            level = std::move(next);
        }
        for (auto& node : level) finalize_leaf(tree, node);

        for (const auto& leaf : leaves_) {
            for (std::size_t k = leaf.begin; k < leaf.end; ++k)
                leaf_value[index_[k]] = leaf.value;
        }
        leaves_.clear();
        return tree;
    }

private:
    double leaf_weight(double sum_g, double sum_h) const {
        const double soft = std::max(std::abs(sum_g) - cfg_.l1, 0.0);
        const double num = sum_g > 0 ? -soft : soft;
        const double denom = std::max(sum_h + cfg_.l2, 1e-12);
        return num / denom;
    }

    bool feature_allowed(const std::vector<int>& path, int feature) const {
        if (!cfg_.interaction_allow) return true;
        for (const auto& allowed : *cfg_.interaction_allow) {
            bool ok = std::find(allowed.begin(), allowed.end(), feature) != allowed.end();
            for (int f : path)
                ok = ok && std::find(allowed.begin(), allowed.end(), f) != allowed.end();
            if (ok) return true;
        }
        return false;
    }

    SplitCandidate find_best_split(const NodeState& node, const std::vector<double>& g,
                                   const std::vector<double>& h) {
        const auto count = node.end - node.begin;
        if (count < 2 * static_cast<std::size_t>(cfg_.min_samples_leaf)) return {};

        std::vector<SplitCandidate> per_feature(p_);
        parallel_for(p_, cfg_.n_threads, [&](std::size_t j) {
            per_feature[j] = best_split_on_feature(static_cast<int>(j), node, g, h);
        });

        SplitCandidate best;
        for (std::size_t j = 0; j < p_; ++j)
            if (per_feature[j].gain > best.gain) best = per_feature[j];
        if (best.feature < 0 || !(best.gain > cfg_.min_gain)) return {};
        return best;
    }

    SplitCandidate best_split_on_feature(int j, const NodeState& node,
                                         const std::vector<double>& g,
                                         const std::vector<double>& h) {
        SplitCandidate best;
        const auto& splits = grid_.features[static_cast<std::size_t>(j)].splits;
        if (splits.empty()) return best;
        if (!feature_allowed(node.path_features, j)) return best;

        const std::size_t bins = splits.size() + 1;
        auto& hg = hist_g_[static_cast<std::size_t>(j)];
        auto& hh = hist_h_[static_cast<std::size_t>(j)];
        auto& hc = hist_c_[static_cast<std::size_t>(j)];
        std::fill(hg.begin(), hg.begin() + static_cast<std::ptrdiff_t>(bins), 0.0);
        std::fill(hh.begin(), hh.begin() + static_cast<std::ptrdiff_t>(bins), 0.0);
        std::fill(hc.begin(), hc.begin() + static_cast<std::ptrdiff_t>(bins), 0);

        const auto& col = binned_[static_cast<std::size_t>(j)];
        for (std::size_t k = node.begin; k < node.end; ++k) {
            const std::size_t i = index_[k];
            const std::uint16_t b = col[i];
            hg[b] += g[i];
            hh[b] += h[i];
            ++hc[b];
        }

        int dir = 0;
        if (auto it = cfg_.monotone.find(j); it != cfg_.monotone.end()) dir = it->second;

        const double total_term =
            node.sum_g * node.sum_g / std::max(node.sum_h + cfg_.l2, 1e-12);
        double gl = 0.0, hl = 0.0;
        std::int64_t cl = 0;
        const auto total = static_cast<std::int64_t>(node.end - node.begin);
        for (std::size_t k = 0; k + 1 < bins; ++k) {
            gl += hg[k];
            hl += hh[k];
            cl += hc[k];
            const std::int64_t cr = total - cl;
            if (cl < cfg_.min_samples_leaf) continue;
            if (cr < cfg_.min_samples_leaf) break;
            const double gr = node.sum_g - gl;
            const double hr = node.sum_h - hl;
            const double gain = 0.5 * (gl * gl / std::max(hl + cfg_.l2, 1e-12) +
                                       gr * gr / std::max(hr + cfg_.l2, 1e-12) - total_term);
            if (!(gain > best.gain)) continue;
            const double wl = std::clamp(leaf_weight(gl, hl), node.lo, node.hi);
            const double wr = std::clamp(leaf_weight(gr, hr), node.lo, node.hi);
            if (dir > 0 && wl > wr) continue;
            if (dir < 0 && wl < wr) continue;
            best.gain = gain;
            best.feature = j;
            best.bin = static_cast<int>(k);
            best.threshold = splits[k];
            best.g_left = gl;
            best.h_left = hl;
            best.g_right = gr;
            best.h_right = hr;
            best.w_left = wl;
            best.w_right = wr;
        }
        return best;
    }

    void apply_split(Tree& tree, const NodeState& node, const SplitCandidate& best,
                     std::vector<NodeState>& next) {
        // stable partition: left = bin index <= split bin
        const auto& col = binned_[static_cast<std::size_t>(best.feature)];
        std::size_t n_left = 0;
        for (std::size_t k = node.begin; k < node.end; ++k)
            if (col[index_[k]] <= static_cast<std::uint16_t>(best.bin)) ++n_left;
        std::size_t wl = node.begin, wr = node.begin + n_left;
        for (std::size_t k = node.begin; k < node.end; ++k) {
            const std::size_t i = index_[k];
            if (col[i] <= static_cast<std::uint16_t>(best.bin))
                scratch_[wl++] = i;
            else
                scratch_[wr++] = i;
        }
        std::copy(scratch_.begin() + static_cast<std::ptrdiff_t>(node.begin),
                  scratch_.begin() + static_cast<std::ptrdiff_t>(node.end),
                  index_.begin() + static_cast<std::ptrdiff_t>(node.begin));

        const int left_id = static_cast<int>(tree.nodes.size());
        tree.nodes.emplace_back();
        const int right_id = static_cast<int>(tree.nodes.size());
        tree.nodes.emplace_back();
        auto& parent = tree.nodes[static_cast<std::size_t>(node.tree_node)];
        parent.feature = best.feature;
        parent.split = best.threshold;
        parent.left = left_id;
        parent.right = right_id;

        NodeState left, right;
        left.begin = node.begin;
        left.end = node.begin + n_left;
        right.begin = left.end;
        right.end = node.end;
        left.sum_g = best.g_left;
        left.sum_h = best.h_left;
        right.sum_g = best.g_right;
        right.sum_h = best.h_right;
        left.tree_node = left_id;
        right.tree_node = right_id;
        left.path_features = node.path_features;
        if (std::find(left.path_features.begin(), left.path_features.end(), best.feature) ==
            left.path_features.end()) {
            left.path_features.push_back(best.feature);
            std::sort(left.path_features.begin(), left.path_features.end());
        }
        right.path_features = left.path_features;

        left.lo = node.lo;
        left.hi = node.hi;
        right.lo = node.lo;
        right.hi = node.hi;
        int dir = 0;
        if (auto it = cfg_.monotone.find(best.feature); it != cfg_.monotone.end())
            dir = it->second;
        if (dir != 0) {
            // children stay on their side of the midpoint so grandchildren
            // cannot cross over
            const double mid = 0.5 * (best.w_left + best.w_right);
            if (dir > 0) {
                left.hi = std::min(left.hi, mid);
                right.lo = std::max(right.lo, mid);
            } else {
                left.lo = std::max(left.lo, mid);
                right.hi = std::min(right.hi, mid);
            }
        }
        next.push_back(std::move(left));
        next.push_back(std::move(right));
    }

    struct LeafSpan {
        std::size_t begin, end;
        double value;
    };

    void finalize_leaf(Tree& tree, const NodeState& node) {
        const double value = std::clamp(leaf_weight(node.sum_g, node.sum_h), node.lo, node.hi);
        tree.nodes[static_cast<std::size_t>(node.tree_node)].feature = -1;
        tree.nodes[static_cast<std::size_t>(node.tree_node)].value = value;
        leaves_.push_back({node.begin, node.end, value});
    }

    const BinGrid& grid_;
    const std::vector<std::vector<std::uint16_t>>& binned_;
    const TrainConfig& cfg_;
    std::size_t p_;
    std::vector<std::size_t> index_;
    std::vector<std::size_t> scratch_;
    std::vector<std::vector<double>> hist_g_, hist_h_;
    std::vector<std::vector<std::int64_t>> hist_c_;
    std::vector<LeafSpan> leaves_;
};

}  // namespace

void TrainConfig::validate(std::size_t n_features) const {
    if (n_estimators < 1) throw ConfigError("n_estimators must be >= 1");
    if (!(learning_rate > 0.0) || learning_rate > 1.0)
        throw ConfigError("learning_rate must be in (0, 1]");
    if (max_depth < 1 || max_depth > 5) throw ConfigError("max_depth must be in [1, 5]");
    if (l1 < 0 || !std::isfinite(l1)) throw ConfigError("l1 must be finite and >= 0");
    if (l2 < 0 || !std::isfinite(l2)) throw ConfigError("l2 must be finite and >= 0");
    if (max_bins < 2 || max_bins > 200) throw ConfigError("max_bins must be in [2, 200]");
    if (early_stopping_rounds < 0) throw ConfigError("early_stopping_rounds must be >= 0");
    if (min_samples_leaf < 1) throw ConfigError("min_samples_leaf must be >= 1");
    if (min_gain < 0) throw ConfigError("min_gain must be >= 0");
    if (n_threads < 1) throw ConfigError("n_threads must be >= 1");
    for (const auto& [f, dir] : monotone) {
        if (f < 0 || f >= static_cast<int>(n_features))
            throw ConfigError("monotone feature index " + std::to_string(f) + " out of range");
        if (dir != -1 && dir != 1 && dir != 0)
            throw ConfigError("monotone direction must be -1, 0 or +1");
    }
    if (interaction_allow) {
        for (const auto& set : *interaction_allow) {
            if (set.empty()) throw ConfigError("interaction allow-sets must be nonempty");
            for (int f : set)
                if (f < 0 || f >= static_cast<int>(n_features))
                    throw ConfigError("interaction feature index " + std::to_string(f) +
                                      " out of range");
        }
    }
}

nlohmann::ordered_json train_config_to_json(const TrainConfig& cfg) {
    nlohmann::ordered_json j;
    j["n_estimators"] = cfg.n_estimators;
    j["learning_rate"] = cfg.learning_rate;
    j["max_depth"] = cfg.max_depth;
    j["l1"] = cfg.l1;
    j["l2"] = cfg.l2;
    j["max_bins"] = cfg.max_bins;
    j["monotone"] = nlohmann::ordered_json::object();
    for (const auto& [f, dir] : cfg.monotone) j["monotone"][std::to_string(f)] = dir;
    if (cfg.interaction_allow)
        j["interaction_allow"] = *cfg.interaction_allow;
    else
        j["interaction_allow"] = nullptr;
    j["early_stopping_rounds"] = cfg.early_stopping_rounds;
    j["min_samples_leaf"] = cfg.min_samples_leaf;
    j["min_gain"] = cfg.min_gain;
    j["seed"] = cfg.seed;
    j["n_threads"] = cfg.n_threads;
    return j;
}

TrainConfig train_config_from_json(const nlohmann::json& j) {
    TrainConfig cfg;
    cfg.n_estimators = j.value("n_estimators", cfg.n_estimators);
    cfg.learning_rate = j.value("learning_rate", cfg.learning_rate);
    cfg.max_depth = j.value("max_depth", cfg.max_depth);
    cfg.l1 = j.value("l1", cfg.l1);
    cfg.l2 = j.value("l2", cfg.l2);
    cfg.max_bins = j.value("max_bins", cfg.max_bins);
    if (j.contains("monotone"))
        for (const auto& [key, dir] : j.at("monotone").items())
            cfg.monotone[std::stoi(key)] = dir.get<int>();
    if (j.contains("interaction_allow") && !j.at("interaction_allow").is_null())
        cfg.interaction_allow = j.at("interaction_allow").get<std::vector<std::vector<int>>>();
    cfg.early_stopping_rounds = j.value("early_stopping_rounds", cfg.early_stopping_rounds);
    cfg.min_samples_leaf = j.value("min_samples_leaf", cfg.min_samples_leaf);
    cfg.min_gain = j.value("min_gain", cfg.min_gain);
    cfg.seed = j.value("seed", cfg.seed);
    cfg.n_threads = j.value("n_threads", cfg.n_threads);
    return cfg;
}

std::pair<Ensemble, FitReport> fit(const Dataset& train, const Dataset& valid,
                                   const TrainConfig& cfg) {
    const std::size_t n = train.n_rows();
    const std::size_t p = train.n_features();
    if (n == 0) throw TrainError("training set is empty");
    cfg.validate(p);
    if (valid.n_rows() > 0 && valid.n_features() != p)
        throw TrainError("train and valid have different feature counts");

    const bool binary = train.task == Task::binary;
    if (binary) {
        double pos = 0;
        for (double y : train.target) {
            if (y != 0.0 && y != 1.0) throw TrainError("binary targets must be 0 or 1");
            pos += y;
        }
        if (pos == 0 || pos == static_cast<double>(n))
            throw TrainError("classification target has a single class");
    }

    BinGrid grid = build_bins(train, static_cast<std::size_t>(cfg.max_bins));
    std::vector<std::vector<std::uint16_t>> binned(p);
    for (std::size_t j = 0; j < p; ++j) {
        binned[j].resize(n);
        for (std::size_t i = 0; i < n; ++i)
            binned[j][i] = static_cast<std::uint16_t>(grid.bin_index(j, train.columns[j][i]));
    }

    double base_score;
    if (binary) {
        const double pbar = mean(train.target);
        base_score = std::log(pbar / (1.0 - pbar));
    } else {
        base_score = mean(train.target);
    }

    Ensemble model;
    model.base_score = base_score;
    model.link = binary ? Link::logit : Link::identity;
    model.feature_names = train.feature_names;
    model.bin_grid = grid;

    FitReport report;
    const std::size_t n_valid = valid.n_rows();
    const bool has_valid = n_valid > 0;
    std::vector<double> pred(n, base_score);
    std::vector<double> pred_valid(n_valid, base_score);
    std::vector<double> g(n), h(n), leaf_value(n);
    std::vector<double> x(p);

    auto train_metric = [&]() {
        if (!binary) return rmse(pred, train.target);
        return auc(pred, train.target);
    };
    auto valid_metric = [&]() {
        if (!binary) return rmse(pred_valid, valid.target);
        return auc(pred_valid, valid.target);
    };
    auto better = [&](double a, double b) { return binary ? a > b : a < b; };

    TreeGrower grower(grid, binned, cfg);
    double best = binary ? -kInf : kInf;
    int best_round = -1;
    int rounds = 0;
    for (int round = 0; round < cfg.n_estimators; ++round) {
        if (binary) {
            for (std::size_t i = 0; i < n; ++i) {
                const double s = sigmoid(pred[i]);
                g[i] = s - train.target[i];
                h[i] = s * (1.0 - s);
            }
        } else {
            for (std::size_t i = 0; i < n; ++i) {
                g[i] = pred[i] - train.target[i];
                h[i] = 1.0;
            }
        }
        Tree tree = grower.grow(g, h, leaf_value);
        for (std::size_t i = 0; i < n; ++i) pred[i] += cfg.learning_rate * leaf_value[i];
        for (std::size_t i = 0; i < n_valid; ++i) {
            for (std::size_t j = 0; j < p; ++j) x[j] = valid.columns[j][i];
            pred_valid[i] += cfg.learning_rate * tree.eval(x);
        }
        model.trees.push_back(std::move(tree));
        model.weights.push_back(cfg.learning_rate);
        ++rounds;

        report.train_curve.push_back(train_metric());
        if (has_valid) {
            const double m = valid_metric();
            report.valid_curve.push_back(m);
            if (better(m, best)) {
                best = m;
                best_round = round;
            }
            if (cfg.early_stopping_rounds > 0 &&
                round - best_round >= cfg.early_stopping_rounds)
                break;
        }
    }

    report.rounds_run = rounds;
    if (has_valid && cfg.early_stopping_rounds > 0 && best_round >= 0) {
        model.trees.resize(static_cast<std::size_t>(best_round) + 1);
        model.weights.resize(static_cast<std::size_t>(best_round) + 1);
        report.best_round = best_round;
        report.final_metric = best;
    } else {
        report.best_round = rounds - 1;
        report.final_metric = has_valid ? report.valid_curve.back() : report.train_curve.back();
    }
    return {std::move(model), std::move(report)};
}

SearchResult random_search(const Dataset& train, const Dataset& valid,
                           const SearchSpace& space, int n_trials, std::uint64_t seed,
                           const TrainConfig& base) {
    if (n_trials < 1) throw ConfigError("random_search requires n_trials >= 1");
    const bool binary = train.task == Task::binary;
    const double worst = binary ? -kInf : kInf;
    auto better = [&](double a, double b) { return binary ? a > b : a < b; };

    Rng rng(seed);
    SearchResult result;
    for (int t = 0; t < n_trials; ++t) {
        TrainConfig cfg = base;
        cfg.n_estimators =
            static_cast<int>(rng.uniform_int(space.n_estimators[0], space.n_estimators[1]));
        cfg.learning_rate = rng.log_uniform(space.learning_rate[0], space.learning_rate[1]);
        cfg.l1 = rng.log_uniform(space.l1[0], space.l1[1]);
        cfg.l2 = rng.log_uniform(space.l2[0], space.l2[1]);
        cfg.max_bins = static_cast<int>(rng.uniform_int(space.max_bins[0], space.max_bins[1]));

        TrialRecord record;
        record.config = cfg;
        try {
            auto [model, report] = fit(train, valid, cfg);
            record.valid_metric = report.final_metric;
            record.rounds_used = report.best_round + 1;
        } catch (const std::exception&) {
            record.valid_metric = worst;
            record.failed = true;
        }
        result.trials.push_back(std::move(record));
    }

    result.best_index = 0;
    double best = worst;
    for (std::size_t t = 0; t < result.trials.size(); ++t) {
        if (result.trials[t].failed) continue;
        if (better(result.trials[t].valid_metric, best)) {
            best = result.trials[t].valid_metric;
            result.best_index = t;
        }
    }
    result.best = result.trials[result.best_index].config;
    return result;
}

}  // namespace treefanova
