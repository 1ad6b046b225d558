#include "treefanova/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

#include "treefanova/errors.hpp"
#include "treefanova/rng.hpp"

namespace treefanova {

std::string to_string(Task t) { return t == Task::regression ? "regression" : "binary"; }

Task task_from_string(const std::string& s) {
    if (s == "regression") return Task::regression;
    if (s == "binary") return Task::binary;
    throw ConfigError("unknown task '" + s + "' (expected regression|binary)");
}

std::vector<double> Dataset::row(std::size_t i) const {
    std::vector<double> x(columns.size());
    for (std::size_t j = 0; j < columns.size(); ++j) x[j] = columns[j][i];
    return x;
}

int Dataset::feature_index(const std::string& name) const {
    for (std::size_t j = 0; j < feature_names.size(); ++j)
        if (feature_names[j] == name) return static_cast<int>(j);
    return -1;
}

std::size_t BinGrid::bin_index(std::size_t j, double x) const {
    const auto& s = features[j].splits;
    return static_cast<std::size_t>(std::upper_bound(s.begin(), s.end(), x) - s.begin());
}

nlohmann::ordered_json bin_grid_to_json(const BinGrid& grid) {
    nlohmann::ordered_json j;
    j["n"] = grid.n_samples;
    j["features"] = nlohmann::ordered_json::array();
    for (const auto& f : grid.features) {
        nlohmann::ordered_json fj;
        fj["feature"] = f.name;
        fj["splits"] = f.splits;
        fj["counts"] = f.counts;
        fj["lo"] = f.lo;
        fj["hi"] = f.hi;
        j["features"].push_back(std::move(fj));
    }
    return j;
}

BinGrid bin_grid_from_json(const nlohmann::json& j) {
    BinGrid grid;
    grid.n_samples = j.at("n").get<std::int64_t>();
    for (const auto& fj : j.at("features")) {
        BinGrid::Feature f;
        f.name = fj.at("feature").get<std::string>();
        f.splits = fj.at("splits").get<std::vector<double>>();
        f.counts = fj.at("counts").get<std::vector<std::int64_t>>();
        f.lo = fj.at("lo").get<double>();
        f.hi = fj.at("hi").get<double>();
        if (!std::is_sorted(f.splits.begin(), f.splits.end()) ||
            std::adjacent_find(f.splits.begin(), f.splits.end()) != f.splits.end())
            throw ModelError("bin grid splits for '" + f.name + "' not strictly increasing");
        if (f.counts.size() != f.splits.size() + 1)
            throw ModelError("bin grid counts size mismatch for '" + f.name + "'");
        grid.features.push_back(std::move(f));
    }
    return grid;
}

namespace {

// RFC-4180 records: quoted fields may contain commas, newlines and doubled quotes.
std::vector<std::vector<std::string>> parse_csv(std::istream& in) {
    std::vector<std::vector<std::string>> records;
    std::vector<std::string> fields;
    std::string field;
    bool in_quotes = false;
    bool field_started = false;
    int c;
    while ((c = in.get()) != EOF) {
        const char ch = static_cast<char>(c);
        if (in_quotes) {
            if (ch == '"') {
                if (in.peek() == '"') {
                    field.push_back('"');
                    in.get();
                } else {
                    in_quotes = false;
                }
            } else {
                field.push_back(ch);
            }
            continue;
        }
        switch (ch) {
            case '"':
                in_quotes = true;
                field_started = true;
                break;
            case ',':
                fields.push_back(std::move(field));
                field.clear();
                field_started = true;
                break;
            case '\r':
                break;
            case '\n':
                if (!field.empty() || field_started || !fields.empty()) {
                    fields.push_back(std::move(field));
                    field.clear();
                    records.push_back(std::move(fields));
                    fields.clear();
                }
                field_started = false;
                break;
            default:
                field.push_back(ch);
                field_started = true;
                break;
        }
    }
    if (in_quotes) throw DataError("unterminated quoted CSV field");
    if (!field.empty() || field_started || !fields.empty()) {
        fields.push_back(std::move(field));
        records.push_back(std::move(fields));
    }
    return records;
}

bool parse_double(const std::string& s, double* out) {
    if (s.empty()) return false;
    const char* begin = s.c_str();
    char* end = nullptr;
    const double v = std::strtod(begin, &end);
    while (end && *end == ' ') ++end;
    if (end != begin + s.size()) return false;
    *out = v;
    return true;
}

}  // namespace

Dataset load_csv(const std::string& path, const std::string& target_column, Task task,
                 const CsvOptions& options) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open CSV file '" + path + "'");
    auto records = parse_csv(in);
    if (records.size() < 2) throw DataError("CSV '" + path + "' needs a header and data rows");

    const auto& header = records[0];
    const std::size_t n_cols = header.size();
    int target_idx = -1;
    for (std::size_t j = 0; j < n_cols; ++j)
        if (header[j] == target_column) target_idx = static_cast<int>(j);
    if (target_idx < 0)
        throw ConfigError("target column '" + target_column + "' not found in '" + path + "'");

    const std::size_t n_rows = records.size() - 1;
    for (std::size_t i = 1; i < records.size(); ++i)
        if (records[i].size() != n_cols)
            throw DataError("CSV row " + std::to_string(i) + " has " +
                            std::to_string(records[i].size()) + " fields, expected " +
                            std::to_string(n_cols));

    // A column is categorical iff its first non-empty cell does not parse as a
    // number; then every cell in it is coded by sorted-lexicographic order.
    std::vector<bool> categorical(n_cols, false);
    for (std::size_t j = 0; j < n_cols; ++j) {
        for (std::size_t i = 1; i <= n_rows; ++i) {
            const std::string& cell = records[i][j];
            if (cell.empty()) continue;
            double v;
            categorical[j] = !parse_double(cell, &v);
            break;
        }
    }
    if (categorical[static_cast<std::size_t>(target_idx)])
        throw DataError("target column '" + target_column + "' is not numeric");

    std::map<std::size_t, std::map<std::string, double>> codes;
    for (std::size_t j = 0; j < n_cols; ++j) {
        if (!categorical[j]) continue;
        std::set<std::string> values;
        for (std::size_t i = 1; i <= n_rows; ++i) {
            if (records[i][j].empty())
                throw DataError("missing value at row " + std::to_string(i) + ", column '" +
                                header[j] + "'");
            values.insert(records[i][j]);
        }
        double code = 0.0;
        for (const auto& v : values) codes[j][v] = code++;
    }

    Dataset data;
    data.task = task;
    for (std::size_t j = 0; j < n_cols; ++j)
        if (static_cast<int>(j) != target_idx) data.feature_names.push_back(header[j]);
    data.columns.assign(data.feature_names.size(), {});

    std::size_t dropped = 0;
    for (std::size_t i = 1; i <= n_rows; ++i) {
        std::vector<double> parsed(n_cols);
        bool bad = false;
        std::string why;
        for (std::size_t j = 0; j < n_cols && !bad; ++j) {
            const std::string& cell = records[i][j];
            if (categorical[j]) {
                parsed[j] = codes[j].at(cell);
                continue;
            }
            double v;
            if (cell.empty()) {
                bad = true;
                why = "missing value";
            } else if (!parse_double(cell, &v)) {
                throw DataError("unparseable cell '" + cell + "' at row " + std::to_string(i) +
                                ", column '" + header[j] + "'");
            } else if (!std::isfinite(v)) {
                bad = true;
                why = "non-finite value";
            } else {
                parsed[j] = v;
            }
        }
        if (bad) {
            if (options.on_bad_row == CsvOptions::BadRow::fail)
                throw DataError(why + " at row " + std::to_string(i));
            ++dropped;
            continue;
        }
        std::size_t f = 0;
        for (std::size_t j = 0; j < n_cols; ++j) {
            if (static_cast<int>(j) == target_idx) continue;
            data.columns[f++].push_back(parsed[j]);
        }
        data.target.push_back(parsed[static_cast<std::size_t>(target_idx)]);
    }

    if (data.n_rows() < 2) throw DataError("fewer than 2 usable rows in '" + path + "'");
    if (data.n_features() < 1) throw DataError("no feature columns in '" + path + "'");
    if (task == Task::binary) {
        for (std::size_t i = 0; i < data.target.size(); ++i)
            if (data.target[i] != 0.0 && data.target[i] != 1.0)
                throw DataError("binary target must be 0 or 1, found " +
                                std::to_string(data.target[i]) + " at data row " +
                                std::to_string(i + 1));
    }
    for (std::size_t j = 0; j < n_cols; ++j) {
        if (!categorical[j]) continue;
        std::vector<std::string> ordered(codes[j].size());
        for (const auto& [value, code] : codes[j]) ordered[static_cast<std::size_t>(code)] = value;
        data.category_codes[header[j]] = std::move(ordered);
    }
    (void)dropped;
    return data;
}

Dataset gen_friedman(std::size_t n, double sigma, std::uint64_t seed) {
    if (n < 1) throw ConfigError("gen_friedman requires n >= 1");
    if (sigma < 0) throw ConfigError("gen_friedman requires sigma >= 0");
    constexpr std::size_t p = 10;
    Dataset data;
    data.task = Task::regression;
    for (std::size_t j = 0; j < p; ++j) data.feature_names.push_back("x" + std::to_string(j + 1));
    data.columns.assign(p, std::vector<double>(n));
    data.target.resize(n);

    Rng rng(seed);
    constexpr double pi = 3.14159265358979323846;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < p; ++j) data.columns[j][i] = rng.uniform();
        const double x1 = data.columns[0][i], x2 = data.columns[1][i], x3 = data.columns[2][i],
                     x4 = data.columns[3][i], x5 = data.columns[4][i];
        double y = 10.0 * std::sin(pi * x1 * x2) + 20.0 * (x3 - 0.5) * (x3 - 0.5) + 10.0 * x4 +
                   5.0 * x5;
        if (sigma > 0) y += sigma * rng.normal();
        data.target[i] = y;
    }
    return data;
}

std::array<Dataset, 3> split(const Dataset& data, const SplitFractions& fractions,
                             std::uint64_t seed) {
    const double sum = fractions.train + fractions.valid + fractions.test;
    if (fractions.train <= 0 || fractions.valid <= 0 || fractions.test <= 0)
        throw ConfigError("split fractions must be positive");
    if (std::abs(sum - 1.0) > 1e-9)
        throw ConfigError("split fractions must sum to 1, got " + std::to_string(sum));

    const std::size_t n = data.n_rows();
    const auto n_test = static_cast<std::size_t>(
        std::llround(fractions.test * static_cast<double>(n)));
    const auto n_valid = static_cast<std::size_t>(
        std::llround(fractions.valid * static_cast<double>(n)));
    if (n_test + n_valid > n) throw ConfigError("dataset too small for requested split");
    const std::size_t n_train = n - n_valid - n_test;

    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    Rng rng(seed);
    rng.shuffle(order);

    auto take = [&](std::size_t begin, std::size_t count) {
        Dataset part;
        part.task = data.task;
        part.feature_names = data.feature_names;
        part.category_codes = data.category_codes;
        part.columns.assign(data.n_features(), {});
        for (std::size_t k = begin; k < begin + count; ++k) {
            const std::size_t i = order[k];
            for (std::size_t j = 0; j < data.n_features(); ++j)
                part.columns[j].push_back(data.columns[j][i]);
            part.target.push_back(data.target[i]);
        }
        return part;
    };
    return {take(0, n_train), take(n_train, n_valid), take(n_train + n_valid, n_test)};
}

BinGrid build_bins(const Dataset& data, std::size_t max_bins) {
    if (max_bins < 2) throw ConfigError("max_bins must be >= 2");
    BinGrid grid;
    grid.n_samples = static_cast<std::int64_t>(data.n_rows());
    const std::size_t n = data.n_rows();

    for (std::size_t j = 0; j < data.n_features(); ++j) {
        BinGrid::Feature f;
        f.name = data.feature_names[j];
        std::vector<double> sorted = data.columns[j];
        std::sort(sorted.begin(), sorted.end());
        f.lo = sorted.front();
        f.hi = sorted.back();

        std::vector<double> distinct;
        for (double v : sorted)
            if (distinct.empty() || v != distinct.back()) distinct.push_back(v);

        if (distinct.size() <= max_bins) {
            // all midpoints between consecutive distinct values
            for (std::size_t k = 0; k + 1 < distinct.size(); ++k)
                f.splits.push_back(0.5 * (distinct[k] + distinct[k + 1]));
        } else {
            // nearest-rank quantiles; split between the quantile value and the
            // next distinct value so no sample sits on a boundary
            for (std::size_t k = 1; k < max_bins; ++k) {
                const double p = static_cast<double>(k) / static_cast<double>(max_bins);
                std::size_t rank = static_cast<std::size_t>(
                    std::ceil(p * static_cast<double>(n)));
                if (rank < 1) rank = 1;
                const double q = sorted[rank - 1];
                auto it = std::upper_bound(distinct.begin(), distinct.end(), q);
                if (it == distinct.end()) continue;
                const double s = 0.5 * (q + *it);
                if (f.splits.empty() || s != f.splits.back()) f.splits.push_back(s);
            }
        }

        f.counts.assign(f.splits.size() + 1, 0);
        for (double v : data.columns[j]) {
            const auto cell = static_cast<std::size_t>(
                std::upper_bound(f.splits.begin(), f.splits.end(), v) - f.splits.begin());
            ++f.counts[cell];
        }
        grid.features.push_back(std::move(f));
    }
    return grid;
}

}  // namespace treefanova
