#pragma once

#include <string>
#include <vector>

#include "treefanova/fanova.hpp"
#include "treefanova/pruning.hpp"

namespace treefanova {

// All plots are deterministic standalone SVG documents with no timestamps.

// Step plot of a main effect over the feature's observed range.
std::string plot_effect_1d(const EffectTensor& effect, const FeatureDomain& domain,
                           const std::string& feature_name, const std::string& title);

// Cell heatmap of a pairwise effect; color scale symmetric around zero,
// bounds recorded in the SVG <desc> metadata.
std::string plot_effect_2d(const EffectTensor& effect, const FeatureDomain& dom_x,
                           const FeatureDomain& dom_y, const std::string& name_x,
                           const std::string& name_y, const std::string& title);

// Sliced line plot of a 3-way effect: value against the first feature, one
// line per cell of the second feature, third feature fixed at its median cell.
std::string plot_effect_3d_slices(const EffectTensor& effect,
                                  const std::vector<FeatureDomain>& domains,
                                  const std::vector<std::string>& names,
                                  const std::string& title);

// Horizontal bar chart (local explanations, importance rankings).
std::string plot_bars(const std::vector<std::string>& labels, const std::vector<double>& values,
                      const std::string& title, const std::string& x_label);

// Regularization path: bars = number of selected effects (left axis),
// line = CV metric (right axis), x = lambda on a log scale.
std::string plot_path(const std::vector<PathEntry>& path, const std::string& metric_name,
                      const std::string& title);

}  // namespace treefanova
