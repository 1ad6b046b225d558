#include "treefanova/fanova.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

#include "treefanova/errors.hpp"

namespace treefanova {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kDropThreshold = 1e-12;

std::vector<std::size_t> strides_of(const std::vector<std::size_t>& shape) {
    std::vector<std::size_t> strides(shape.size());
    std::size_t s = 1;
    for (std::size_t d = shape.size(); d-- > 0;) {
        strides[d] = s;
        s *= shape[d];
    }
    return strides;
}

// Calls fn(base_offset, rest_index) for every joint index of the dimensions
// other than `dim`, with the `dim` coordinate at 0. Rest indices run
// row-major over the remaining dimensions.
template <typename Fn>
void for_each_slice(const std::vector<std::size_t>& shape,
                    const std::vector<std::size_t>& strides, std::size_t dim, Fn&& fn) {
    std::vector<std::size_t> rest_dims;
    for (std::size_t d = 0; d < shape.size(); ++d)
        if (d != dim) rest_dims.push_back(d);
    std::size_t rest_count = 1;
    for (auto d : rest_dims) rest_count *= shape[d];
    for (std::size_t rest = 0; rest < rest_count; ++rest) {
        std::size_t r = rest, offset = 0;
        for (std::size_t k = rest_dims.size(); k-- > 0;) {
            const std::size_t d = rest_dims[k];
            offset += (r % shape[d]) * strides[d];
            r /= shape[d];
        }
        fn(offset, rest);
    }
}

// Maps each cell of the refined axis to its covering cell on the old axis.
std::vector<std::size_t> cell_mapping(const std::vector<double>& old_axis,
                                      const std::vector<double>& new_axis) {
    std::vector<std::size_t> map(new_axis.size() + 1);
    map[0] = 0;
    for (std::size_t i = 1; i <= new_axis.size(); ++i) {
        const double lo = new_axis[i - 1];
        map[i] = static_cast<std::size_t>(
            std::upper_bound(old_axis.begin(), old_axis.end(), lo) - old_axis.begin());
    }
    return map;
}

std::vector<double> sorted_union(const std::vector<double>& a, const std::vector<double>& b) {
    std::vector<double> out;
    std::set_union(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
    return out;
}

// Piecewise-constant refinement: replicate values into the finer grid.
std::vector<double> refine_values(const std::vector<double>& values,
                                  const std::vector<std::vector<double>>& old_axes,
                                  const std::vector<std::vector<double>>& new_axes) {
    const std::size_t t = old_axes.size();
    std::vector<std::size_t> old_shape(t), new_shape(t);
    std::vector<std::vector<std::size_t>> maps(t);
    for (std::size_t d = 0; d < t; ++d) {
        old_shape[d] = old_axes[d].size() + 1;
        new_shape[d] = new_axes[d].size() + 1;
        maps[d] = cell_mapping(old_axes[d], new_axes[d]);
    }
    const auto old_strides = strides_of(old_shape);
    std::size_t total = 1;
    for (auto s : new_shape) total *= s;
    std::vector<double> out(total);
    std::vector<std::size_t> idx(t, 0);
    for (std::size_t flat = 0; flat < total; ++flat) {
        std::size_t old_flat = 0;
        for (std::size_t d = 0; d < t; ++d) old_flat += maps[d][idx[d]] * old_strides[d];
        out[flat] = values[old_flat];
        std::size_t d = t;
        while (d-- > 0) {
            if (++idx[d] < new_shape[d]) break;
            idx[d] = 0;
        }
    }
    return out;
}

}  // namespace

std::string tuple_label(const FeatureTuple& t, const std::vector<std::string>& names) {
    std::string out;
    for (std::size_t i = 0; i < t.size(); ++i) {
        if (i) out += " x ";
        const auto f = static_cast<std::size_t>(t[i]);
        out += f < names.size() ? names[f] : "f" + std::to_string(t[i]);
    }
    return out;
}

Weighting weighting_from_string(const std::string& s) {
    if (s == "uniform") return Weighting::uniform;
    if (s == "empirical") return Weighting::empirical;
    throw ConfigError("unknown weighting '" + s + "' (expected uniform|empirical)");
}

std::string to_string(Weighting w) {
    return w == Weighting::uniform ? "uniform" : "empirical";
}

std::vector<std::size_t> EffectTensor::shape() const {
    std::vector<std::size_t> s(axes.size());
    for (std::size_t d = 0; d < axes.size(); ++d) s[d] = axes[d].size() + 1;
    return s;
}

std::size_t EffectTensor::cell_count() const {
    std::size_t total = 1;
    for (const auto& a : axes) total *= a.size() + 1;
    return total;
}

std::vector<std::size_t> EffectTensor::cell_of(std::span<const double> x_sub) const {
    std::vector<std::size_t> idx(axes.size());
    for (std::size_t d = 0; d < axes.size(); ++d)
        idx[d] = static_cast<std::size_t>(
            std::upper_bound(axes[d].begin(), axes[d].end(), x_sub[d]) - axes[d].begin());
    return idx;
}

double EffectTensor::value_at(std::span<const double> x_sub) const {
    const auto idx = cell_of(x_sub);
    const auto strides = strides_of(shape());
    std::size_t flat = 0;
    for (std::size_t d = 0; d < idx.size(); ++d) flat += idx[d] * strides[d];
    return values[flat];
}

double EffectTensor::max_abs_value() const {
    double m = 0.0;
    for (double v : values) m = std::max(m, std::abs(v));
    return m;
}

void EffectTensor::check_consistent() const {
    if (features.empty() || features.size() > 3)
        throw ModelError("effect arity must be 1..3");
    if (!std::is_sorted(features.begin(), features.end()) ||
        std::adjacent_find(features.begin(), features.end()) != features.end())
        throw ModelError("effect features must be sorted and distinct");
    if (axes.size() != features.size()) throw ModelError("effect axes/features mismatch");
    for (const auto& a : axes) {
        if (!std::is_sorted(a.begin(), a.end()) ||
            std::adjacent_find(a.begin(), a.end()) != a.end())
            throw ModelError("effect axis not strictly increasing");
        for (double s : a)
            if (!std::isfinite(s)) throw ModelError("effect axis value not finite");
    }
    if (values.size() != cell_count()) throw ModelError("effect values shape mismatch");
    if (weights.size() != cell_count()) throw ModelError("effect weights shape mismatch");
    for (double v : values)
        if (!std::isfinite(v)) throw ModelError("effect value not finite");
    for (double w : weights)
        if (!(w >= 0.0)) throw ModelError("effect weight negative or NaN");
}

double cell_mass(const FeatureDomain& domain, double lo, double hi, Weighting w) {
    if (!domain.known) return 1.0;
    if (w == Weighting::uniform) {
        const double a = std::max(lo, domain.lo);
        const double b = std::min(hi, domain.hi);
        return std::max(b - a, 0.0);
    }
    // empirical: sum grid-bin masses whose range falls inside [lo, hi)
    const auto& s = domain.splits;
    const std::size_t first =
        lo == -kInf ? 0
                    : static_cast<std::size_t>(
                          std::upper_bound(s.begin(), s.end(), lo) - s.begin());
    const std::size_t end =
        hi == kInf ? domain.masses.size()
                   : static_cast<std::size_t>(
                         std::upper_bound(s.begin(), s.end(), hi) - s.begin());
    double total = 0.0;
    for (std::size_t k = first; k < end && k < domain.masses.size(); ++k)
        total += domain.masses[k];
    return total;
}

std::vector<double> axis_masses(const FeatureDomain& domain, const std::vector<double>& axis,
                                Weighting w) {
    std::vector<double> masses(axis.size() + 1);
    for (std::size_t i = 0; i <= axis.size(); ++i) {
        const double lo = i == 0 ? -kInf : axis[i - 1];
        const double hi = i == axis.size() ? kInf : axis[i];
        masses[i] = cell_mass(domain, lo, hi, w);
    }
    return masses;
}

namespace {

void refresh_weights(EffectTensor& eff, const std::vector<FeatureDomain>& domains,
                     Weighting w) {
    const std::size_t t = eff.arity();
    std::vector<std::vector<double>> per_axis(t);
    for (std::size_t d = 0; d < t; ++d) {
        const auto f = static_cast<std::size_t>(eff.features[d]);
        static const FeatureDomain kUnknown{};
        const FeatureDomain& dom = f < domains.size() ? domains[f] : kUnknown;
        per_axis[d] = axis_masses(dom, eff.axes[d], w);
    }
    const auto shape = eff.shape();
    eff.weights.assign(eff.cell_count(), 1.0);
    std::vector<std::size_t> idx(t, 0);
    for (std::size_t flat = 0; flat < eff.weights.size(); ++flat) {
        double m = 1.0;
        for (std::size_t d = 0; d < t; ++d) m *= per_axis[d][idx[d]];
        eff.weights[flat] = m;
        std::size_t d = t;
        while (d-- > 0) {
            if (++idx[d] < shape[d]) break;
            idx[d] = 0;
        }
    }
}

}  // namespace

FanovaModel aggregate(const Ensemble& model) {
    model.validate();
    FanovaModel out;
    out.link = model.link;
    out.feature_names = model.feature_names;
    out.intercept = model.base_score;
    out.max_arity = 3;
    out.domains.resize(model.n_features());
    if (model.bin_grid) {
        for (std::size_t j = 0; j < model.bin_grid->features.size(); ++j) {
            const auto& f = model.bin_grid->features[j];
            FeatureDomain dom;
            dom.splits = f.splits;
            dom.masses.assign(f.counts.begin(), f.counts.end());
            dom.lo = f.lo;
            dom.hi = f.hi;
            dom.known = true;
            out.domains[j] = std::move(dom);
        }
    }

    const auto rules = extract_leaf_rules(model);

    std::map<FeatureTuple, std::vector<std::set<double>>> axis_sets;
    for (const auto& rule : rules) {
        if (rule.unreachable || rule.intervals.empty()) continue;
        if (rule.intervals.size() > 3)
            throw ModelError(
                "leaf rule touches " + std::to_string(rule.intervals.size()) +
                " features; interpretation supports arity <= 3 (limit tree depth or add "
                "interaction constraints)");
        FeatureTuple tuple;
        for (const auto& [f, iv] : rule.intervals) tuple.push_back(f);
        auto& sets = axis_sets[tuple];
        sets.resize(tuple.size());
        std::size_t d = 0;
        for (const auto& [f, iv] : rule.intervals) {
            if (std::isfinite(iv.lo)) sets[d].insert(iv.lo);
            if (std::isfinite(iv.hi)) sets[d].insert(iv.hi);
            ++d;
        }
    }

    for (const auto& [tuple, sets] : axis_sets) {
        EffectTensor eff;
        eff.features = tuple;
        eff.axes.resize(tuple.size());
        for (std::size_t d = 0; d < tuple.size(); ++d)
            eff.axes[d].assign(sets[d].begin(), sets[d].end());
        eff.values.assign(eff.cell_count(), 0.0);
        refresh_weights(eff, out.domains, Weighting::empirical);
        out.effects.emplace(tuple, std::move(eff));
    }

    for (const auto& rule : rules) {
        if (rule.unreachable) continue;
        if (rule.intervals.empty()) {
            out.intercept += rule.value;
            continue;
        }
        FeatureTuple tuple;
        for (const auto& [f, iv] : rule.intervals) tuple.push_back(f);
        EffectTensor& eff = out.effects.at(tuple);
        const auto shape = eff.shape();
        const auto strides = strides_of(shape);
        const std::size_t t = tuple.size();

        std::vector<std::size_t> first(t), last(t);
        std::size_t d = 0;
        for (const auto& [f, iv] : rule.intervals) {
            const auto& axis = eff.axes[d];
            if (iv.lo == -kInf) {
                first[d] = 0;
            } else {
                const auto pos = static_cast<std::size_t>(
                    std::lower_bound(axis.begin(), axis.end(), iv.lo) - axis.begin());
                first[d] = pos + 1;
            }
            if (iv.hi == kInf) {
                last[d] = shape[d] - 1;
            } else {
                last[d] = static_cast<std::size_t>(
                    std::lower_bound(axis.begin(), axis.end(), iv.hi) - axis.begin());
            }
            ++d;
        }

        std::vector<std::size_t> idx = first;
        while (true) {
            std::size_t flat = 0;
            for (std::size_t e = 0; e < t; ++e) flat += idx[e] * strides[e];
            eff.values[flat] += rule.value;
            std::size_t e = t;
            bool done = true;
            while (e-- > 0) {
                if (++idx[e] <= last[e]) {
                    done = false;
                    break;
                }
                idx[e] = first[e];
            }
            if (done) break;
        }
    }
    return out;
}

namespace {

// Weighted means over one dimension; zero-mass slices give 0.
std::vector<double> slice_means(const EffectTensor& eff, std::size_t dim) {
    const auto shape = eff.shape();
    const auto strides = strides_of(shape);
    std::size_t rest_count = 1;
    for (std::size_t d = 0; d < shape.size(); ++d)
        if (d != dim) rest_count *= shape[d];
    std::vector<double> num(rest_count, 0.0), den(rest_count, 0.0);
    for_each_slice(shape, strides, dim, [&](std::size_t base, std::size_t rest) {
        for (std::size_t k = 0; k < shape[dim]; ++k) {
            const std::size_t flat = base + k * strides[dim];
            num[rest] += eff.weights[flat] * eff.values[flat];
            den[rest] += eff.weights[flat];
        }
    });
    for (std::size_t r = 0; r < rest_count; ++r) num[r] = den[r] > 0.0 ? num[r] / den[r] : 0.0;
    return num;
}

void subtract_means(EffectTensor& eff, std::size_t dim, const std::vector<double>& means) {
    const auto shape = eff.shape();
    const auto strides = strides_of(shape);
    for_each_slice(shape, strides, dim, [&](std::size_t base, std::size_t rest) {
        for (std::size_t k = 0; k < shape[dim]; ++k)
            eff.values[base + k * strides[dim]] -= means[rest];
    });
}

// Adds a (t-1)-dim mean tensor to the child effect, creating or refining it.
void add_to_child(FanovaModel& model, const FeatureTuple& child_tuple,
                  const std::vector<std::vector<double>>& src_axes,
                  const std::vector<double>& src_values, Weighting w) {
    auto it = model.effects.find(child_tuple);
    if (it == model.effects.end()) {
        EffectTensor child;
        child.features = child_tuple;
        child.axes = src_axes;
        child.values = src_values;
        refresh_weights(child, model.domains, w);
        model.effects.emplace(child_tuple, std::move(child));
        return;
    }
    EffectTensor& child = it->second;
    std::vector<std::vector<double>> new_axes(child_tuple.size());
    bool child_same = true, src_same = true;
    for (std::size_t d = 0; d < child_tuple.size(); ++d) {
        new_axes[d] = sorted_union(child.axes[d], src_axes[d]);
        child_same = child_same && new_axes[d].size() == child.axes[d].size();
        src_same = src_same && new_axes[d].size() == src_axes[d].size();
    }
    std::vector<double> addend =
        src_same ? src_values : refine_values(src_values, src_axes, new_axes);
    if (!child_same) {
        child.values = refine_values(child.values, child.axes, new_axes);
        child.axes = new_axes;
        refresh_weights(child, model.domains, w);
    }
    for (std::size_t i = 0; i < child.values.size(); ++i) child.values[i] += addend[i];
}

}  // namespace

PurifyResult purify(const FanovaModel& model, const PurifyOptions& options) {
    PurifyResult result;
    FanovaModel work = model;
    for (auto& [tuple, eff] : work.effects) refresh_weights(eff, work.domains, options.weighting);

    for (std::size_t arity = 3; arity >= 2; --arity) {
        std::vector<FeatureTuple> keys;
        for (const auto& [tuple, eff] : work.effects)
            if (tuple.size() == arity) keys.push_back(tuple);

        for (const auto& key : keys) {
            EffectTensor& eff = work.effects.at(key);
            double change = 0.0;
            for (int iter = 0; iter < options.max_iter; ++iter) {
                change = 0.0;
                for (std::size_t d = 0; d < arity; ++d) {
                    auto means = slice_means(eff, d);
                    double max_mean = 0.0;
                    for (double m : means) max_mean = std::max(max_mean, std::abs(m));
                    if (max_mean == 0.0) continue;
                    subtract_means(eff, d, means);
                    change = std::max(change, max_mean);

                    FeatureTuple child_tuple;
                    std::vector<std::vector<double>> src_axes;
                    for (std::size_t e = 0; e < arity; ++e) {
                        if (e == d) continue;
                        child_tuple.push_back(eff.features[e]);
                        src_axes.push_back(eff.axes[e]);
                    }
                    add_to_child(work, child_tuple, src_axes, means, options.weighting);
                }
                if (change < options.tol) break;
            }
            if (!(change < options.tol)) {
                result.converged = false;
                result.max_residual = std::max(result.max_residual, change);
            }
        }
    }

    // main effects: move the weighted mean into the intercept
    std::vector<FeatureTuple> mains;
    for (const auto& [tuple, eff] : work.effects)
        if (tuple.size() == 1) mains.push_back(tuple);
    for (const auto& key : mains) {
        EffectTensor& eff = work.effects.at(key);
        double num = 0.0, den = 0.0;
        for (std::size_t i = 0; i < eff.values.size(); ++i) {
            num += eff.weights[i] * eff.values[i];
            den += eff.weights[i];
        }
        const double m = den > 0.0 ? num / den : 0.0;
        for (auto& v : eff.values) v -= m;
        work.intercept += m;
    }

    // exact-zero cleanup keeps reported effect counts meaningful
    for (auto it = work.effects.begin(); it != work.effects.end();) {
        if (it->second.max_abs_value() < kDropThreshold)
            it = work.effects.erase(it);
        else
            ++it;
    }

    result.model = std::move(work);
    return result;
}

double evaluate(const FanovaModel& model, std::span<const double> x) {
    if (x.size() != model.n_features() && !model.feature_names.empty())
        throw ModelError("feature vector size mismatch in evaluate");
    double out = model.intercept;
    std::vector<double> sub;
    for (const auto& [tuple, eff] : model.effects) {
        sub.clear();
        for (int f : tuple) sub.push_back(x[static_cast<std::size_t>(f)]);
        out += eff.value_at(sub);
    }
    return out;
}

std::vector<double> evaluate(const FanovaModel& model, const Dataset& data) {
    std::vector<double> out(data.n_rows());
    std::vector<double> x(data.n_features());
    for (std::size_t i = 0; i < data.n_rows(); ++i) {
        for (std::size_t j = 0; j < data.n_features(); ++j) x[j] = data.columns[j][i];
        out[i] = evaluate(model, x);
    }
    return out;
}

double max_slice_mean(const FanovaModel& model, Weighting w) {
    double worst = 0.0;
    for (const auto& [tuple, eff] : model.effects) {
        EffectTensor weighted = eff;
        refresh_weights(weighted, model.domains, w);
        for (std::size_t d = 0; d < weighted.arity(); ++d) {
            if (weighted.arity() == 1) {
                double num = 0.0, den = 0.0;
                for (std::size_t i = 0; i < weighted.values.size(); ++i) {
                    num += weighted.weights[i] * weighted.values[i];
                    den += weighted.weights[i];
                }
                worst = std::max(worst, den > 0 ? std::abs(num / den) : 0.0);
            } else {
                for (double m : slice_means(weighted, d)) worst = std::max(worst, std::abs(m));
            }
        }
    }
    return worst;
}

double effect_inner_product(const FanovaModel& model, const FeatureTuple& a,
                            const FeatureTuple& b, Weighting w) {
    const EffectTensor& ea = model.effects.at(a);
    const EffectTensor& eb = model.effects.at(b);

    FeatureTuple all;
    std::set_union(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(all));

    std::vector<std::vector<double>> axes(all.size());
    std::vector<std::vector<double>> masses(all.size());
    std::vector<int> pos_a(all.size(), -1), pos_b(all.size(), -1);
    for (std::size_t d = 0; d < all.size(); ++d) {
        const int f = all[d];
        std::vector<double> axis;
        for (std::size_t e = 0; e < a.size(); ++e)
            if (a[e] == f) {
                axis = sorted_union(axis, ea.axes[e]);
                pos_a[d] = static_cast<int>(e);
            }
        for (std::size_t e = 0; e < b.size(); ++e)
            if (b[e] == f) {
                axis = sorted_union(axis, eb.axes[e]);
                pos_b[d] = static_cast<int>(e);
            }
        axes[d] = std::move(axis);
        static const FeatureDomain kUnknown{};
        const auto fi = static_cast<std::size_t>(f);
        masses[d] = axis_masses(fi < model.domains.size() ? model.domains[fi] : kUnknown,
                                axes[d], w);
    }

    // per-dimension maps from the refined axis into each effect's own axis
    std::vector<std::vector<std::size_t>> map_a(all.size()), map_b(all.size());
    for (std::size_t d = 0; d < all.size(); ++d) {
        if (pos_a[d] >= 0)
            map_a[d] = cell_mapping(ea.axes[static_cast<std::size_t>(pos_a[d])], axes[d]);
        if (pos_b[d] >= 0)
            map_b[d] = cell_mapping(eb.axes[static_cast<std::size_t>(pos_b[d])], axes[d]);
    }
    const auto strides_a = strides_of(ea.shape());
    const auto strides_b = strides_of(eb.shape());

    std::vector<std::size_t> shape(all.size());
    for (std::size_t d = 0; d < all.size(); ++d) shape[d] = axes[d].size() + 1;
    std::size_t total = 1;
    for (auto s : shape) total *= s;

    double num = 0.0, den = 0.0;
    std::vector<std::size_t> idx(all.size(), 0);
    for (std::size_t flat = 0; flat < total; ++flat) {
        double m = 1.0;
        std::size_t fa = 0, fb = 0;
        for (std::size_t d = 0; d < all.size(); ++d) {
            m *= masses[d][idx[d]];
            if (pos_a[d] >= 0)
                fa += map_a[d][idx[d]] * strides_a[static_cast<std::size_t>(pos_a[d])];
            if (pos_b[d] >= 0)
                fb += map_b[d][idx[d]] * strides_b[static_cast<std::size_t>(pos_b[d])];
        }
        num += m * ea.values[fa] * eb.values[fb];
        den += m;
        std::size_t d = all.size();
        while (d-- > 0) {
            if (++idx[d] < shape[d]) break;
            idx[d] = 0;
        }
    }
    return den > 0.0 ? num / den : 0.0;
}

nlohmann::ordered_json fanova_to_json(const FanovaModel& model) {
    nlohmann::ordered_json j;
    j["version"] = 1;
    j["intercept"] = model.intercept;
    j["link"] = to_string(model.link);
    j["feature_names"] = model.feature_names;
    j["max_arity"] = model.max_arity;
    j["domains"] = nlohmann::ordered_json::array();
    for (const auto& dom : model.domains) {
        nlohmann::ordered_json dj;
        dj["known"] = dom.known;
        dj["splits"] = dom.splits;
        dj["masses"] = dom.masses;
        dj["lo"] = dom.lo;
        dj["hi"] = dom.hi;
        j["domains"].push_back(std::move(dj));
    }
    j["effects"] = nlohmann::ordered_json::array();
    for (const auto& [tuple, eff] : model.effects) {
        nlohmann::ordered_json ej;
        ej["features"] = eff.features;
        ej["splits"] = eff.axes;
        ej["values"] = eff.values;   // row-major, last feature fastest
        ej["weights"] = eff.weights;
        j["effects"].push_back(std::move(ej));
    }
    return j;
}

FanovaModel fanova_from_json(const nlohmann::json& j) {
    FanovaModel model;
    model.intercept = j.at("intercept").get<double>();
    model.link = link_from_string(j.at("link").get<std::string>());
    model.feature_names = j.at("feature_names").get<std::vector<std::string>>();
    model.max_arity = j.value("max_arity", 3);
    if (j.contains("domains")) {
        for (const auto& dj : j.at("domains")) {
            FeatureDomain dom;
            dom.known = dj.at("known").get<bool>();
            dom.splits = dj.at("splits").get<std::vector<double>>();
            dom.masses = dj.at("masses").get<std::vector<double>>();
            dom.lo = dj.at("lo").get<double>();
            dom.hi = dj.at("hi").get<double>();
            model.domains.push_back(std::move(dom));
        }
    } else {
        model.domains.resize(model.feature_names.size());
    }
    for (const auto& ej : j.at("effects")) {
        EffectTensor eff;
        eff.features = ej.at("features").get<FeatureTuple>();
        eff.axes = ej.at("splits").get<std::vector<std::vector<double>>>();
        eff.values = ej.at("values").get<std::vector<double>>();
        eff.weights = ej.at("weights").get<std::vector<double>>();
        eff.check_consistent();
        model.effects.emplace(eff.features, std::move(eff));
    }
    return model;
}

}  // namespace treefanova
