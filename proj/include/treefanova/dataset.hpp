#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

namespace treefanova {

enum class Task { regression, binary };

std::string to_string(Task t);
Task task_from_string(const std::string& s);

struct CsvOptions {
    enum class BadRow { fail, drop };
    // What to do with rows containing missing/NaN/inf cells.
    BadRow on_bad_row = BadRow::fail;
};

// Column-major tabular data. `columns[j][i]` is feature j of sample i.
struct Dataset {
    std::vector<std::vector<double>> columns;
    std::vector<double> target;
    std::vector<std::string> feature_names;
    Task task = Task::regression;
    // Categorical code books: feature name -> sorted categories; code = position.
    std::map<std::string, std::vector<std::string>> category_codes;

    std::size_t n_rows() const { return target.size(); }
    std::size_t n_features() const { return columns.size(); }
    std::vector<double> row(std::size_t i) const;
    int feature_index(const std::string& name) const;  // -1 if absent
};

// Per-feature candidate split points plus bin masses and the observed range.
struct BinGrid {
    struct Feature {
        std::string name;
        std::vector<double> splits;        // strictly increasing
        std::vector<std::int64_t> counts;  // size splits.size()+1, sums to n
        double lo = 0.0;                   // observed min
        double hi = 0.0;                   // observed max
    };
    std::vector<Feature> features;
    std::int64_t n_samples = 0;

    // Cell index of x on feature j: number of splits <= x. Cell i covers
    // [split[i-1], split[i]) with unbounded end cells.
    std::size_t bin_index(std::size_t j, double x) const;
};

nlohmann::ordered_json bin_grid_to_json(const BinGrid& grid);
BinGrid bin_grid_from_json(const nlohmann::json& j);

// RFC-4180 CSV with a header row. Numeric columns are parsed as doubles; a
// column whose first non-empty cell is not numeric is treated as categorical
// and coded by sorted-lexicographic order. Unparseable cells in numeric
// columns, missing cells, and non-finite values are errors (or drop the row,
// per options). Binary targets must be exactly 0 or 1.
Dataset load_csv(const std::string& path, const std::string& target_column, Task task,
                 const CsvOptions& options = {});

// Friedman simulation: 10 covariates uniform on [0,1], of which x6..x10 are
// noise, y = 10 sin(pi x1 x2) + 20 (x3 - 0.5)^2 + 10 x4 + 5 x5 + N(0, sigma^2).
Dataset gen_friedman(std::size_t n, double sigma, std::uint64_t seed);

struct SplitFractions {
    double train = 0.64;
    double valid = 0.16;
    double test = 0.20;
};

// Disjoint seeded partition. Test/valid sizes round to nearest; the
// remainder goes to train.
std::array<Dataset, 3> split(const Dataset& data, const SplitFractions& fractions,
                             std::uint64_t seed);

// Quantile binning: candidate split points are midpoints between distinct
// consecutive nearest-rank quantile values; features with few distinct values
// use all midpoints between distinct values. Constant features get no splits.
BinGrid build_bins(const Dataset& data, std::size_t max_bins);

}  // namespace treefanova
