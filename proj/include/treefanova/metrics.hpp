#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace treefanova {

double sigmoid(double z);

double mean(std::span<const double> v);

// Population variance (1/n).
double variance(std::span<const double> v);

double rmse(std::span<const double> pred, std::span<const double> truth);

// R^2 about the mean of `truth`.
double r_squared(std::span<const double> pred, std::span<const double> truth);

// Rank-based AUC with tied scores averaged; labels in {0,1}.
// Returns 0.5 when one class is absent.
double auc(std::span<const double> score, std::span<const double> label);

// Mean negative log-likelihood of Bernoulli labels given raw (logit) scores.
double log_loss(std::span<const double> raw_score, std::span<const double> label);

}  // namespace treefanova
