#include "tckae/core.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

namespace tckae {

namespace {

std::vector<std::string> split_line(const std::string& line, char sep = ',') {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        const std::size_t pos = line.find(sep, start);
        if (pos == std::string::npos) {
            out.push_back(line.substr(start));
            break;
        }
        out.push_back(line.substr(start, pos - start));
        start = pos + 1;
    }
    return out;
}

std::string strip(const std::string& s) {
    std::size_t b = 0, e = s.size();
    while (b < e && (s[b] == ' ' || s[b] == '\t' || s[b] == '\r')) ++b;
    while (e > b && (s[e - 1] == ' ' || s[e - 1] == '\t' || s[e - 1] == '\r')) --e;
    return s.substr(b, e - b);
}

double parse_value(const std::string& token, const std::string& context) {
    const std::string t = strip(token);
    if (t == "NaN") return std::numeric_limits<double>::quiet_NaN();
    double x = 0.0;
    const auto res = std::from_chars(t.data(), t.data() + t.size(), x);
    if (res.ec != std::errc() || res.ptr != t.data() + t.size())
        throw DataError("cannot parse number '" + t + "' in " + context);
    if (!std::isfinite(x))
        throw DataError("non-finite observed value '" + t + "' in " + context);
    return x;
}

long parse_int(const std::string& token, const std::string& context) {
    const std::string t = strip(token);
    long x = 0;
    const auto res = std::from_chars(t.data(), t.data() + t.size(), x);
    if (res.ec != std::errc() || res.ptr != t.data() + t.size())
        throw DataError("cannot parse integer '" + t + "' in " + context);
    return x;
}

}  // namespace

// ---------------------------------------------------------------------------
// TimeSeriesDataset
// ---------------------------------------------------------------------------

TimeSeriesDataset::TimeSeriesDataset(int n, int t, int v)
    : n_(n),
      t_(t),
      v_(v),
      values_(static_cast<std::size_t>(n) * t * v, std::numeric_limits<double>::quiet_NaN()),
      mask_(static_cast<std::size_t>(n) * t * v, 0) {
    if (n < 0 || t < 0 || v < 0) throw DataError("negative dataset dimension");
}

int TimeSeriesDataset::observed_count(int i) const {
    int count = 0;
    for (int t = 0; t < t_; ++t)
        for (int v = 0; v < v_; ++v)
            if (observed(i, t, v)) ++count;
    return count;
}

void TimeSeriesDataset::validate() const {
    for (int i = 0; i < n_; ++i) {
        for (int t = 0; t < t_; ++t)
            for (int v = 0; v < v_; ++v)
                if (observed(i, t, v) && !std::isfinite(value(i, t, v)))
                    throw DataError("non-finite observed value in series " + std::to_string(i));
    }
    if (labels) {
        if (static_cast<int>(labels->size()) != n_)
            throw DataError("label count does not match series count");
        for (const int y : *labels)
            if (y != 0 && y != 1) throw DataError("labels must be in {0,1}");
    }
}

// ---------------------------------------------------------------------------
// Imputation
// ---------------------------------------------------------------------------

ImputationMethod ImputationMethod::mean_from(const TimeSeriesDataset& train) {
    ImputationMethod m;
    m.tag = Imputation::Mean;
    const int V = train.num_variables();
    m.means.assign(static_cast<std::size_t>(V), 0.0);
    std::vector<long> counts(static_cast<std::size_t>(V), 0);
    for (int i = 0; i < train.num_series(); ++i)
        for (int t = 0; t < train.num_steps(); ++t)
            for (int v = 0; v < V; ++v)
                if (train.observed(i, t, v)) {
                    m.means[static_cast<std::size_t>(v)] += train.value(i, t, v);
                    ++counts[static_cast<std::size_t>(v)];
                }
    for (int v = 0; v < V; ++v) {
        if (counts[static_cast<std::size_t>(v)] == 0)
            throw DataError("variable " + std::to_string(v) +
                            " has no observed training cells for mean imputation");
        m.means[static_cast<std::size_t>(v)] /= static_cast<double>(counts[static_cast<std::size_t>(v)]);
    }
    return m;
}

ImputationMethod parse_imputation(const std::string& name, const TimeSeriesDataset& train) {
    if (name == "zero") return ImputationMethod::zero();
    if (name == "locf") return ImputationMethod::locf();
    if (name == "mean") return ImputationMethod::mean_from(train);
    throw std::invalid_argument("unknown imputation '" + name + "' (expected zero|mean|locf)");
}

std::string imputation_name(Imputation tag) {
    switch (tag) {
        case Imputation::Zero: return "zero";
        case Imputation::Mean: return "mean";
        case Imputation::Locf: return "locf";
    }
    return "?";
}

TimeSeriesDataset impute(const TimeSeriesDataset& ds, const ImputationMethod& method) {
    if (method.tag == Imputation::Mean &&
        static_cast<int>(method.means.size()) != ds.num_variables())
        throw std::invalid_argument("mean imputation requires one statistic per variable");

    TimeSeriesDataset out = ds;
    const int N = ds.num_series(), T = ds.num_steps(), V = ds.num_variables();
    for (int i = 0; i < N; ++i) {
        for (int v = 0; v < V; ++v) {
            // LOCF carries the last observed value forward; a gap before the
            // first observation is filled with 0 (the standardized mean).
            double last = 0.0;
            bool seen = false;
            for (int t = 0; t < T; ++t) {
                if (ds.observed(i, t, v)) {
                    last = ds.value(i, t, v);
                    seen = true;
                    continue;
                }
                double fill = 0.0;
                switch (method.tag) {
                    case Imputation::Zero: fill = 0.0; break;
                    case Imputation::Mean: fill = method.means[static_cast<std::size_t>(v)]; break;
                    case Imputation::Locf: fill = seen ? last : 0.0; break;
                }
                out.fill_value(i, t, v, fill);
            }
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Standardization
// ---------------------------------------------------------------------------

StandardizationStats compute_standardization(const TimeSeriesDataset& train) {
    const int V = train.num_variables();
    StandardizationStats stats;
    stats.mean.assign(static_cast<std::size_t>(V), 0.0);
    stats.stddev.assign(static_cast<std::size_t>(V), 1.0);
    for (int v = 0; v < V; ++v) {
        double sum = 0.0, sumsq = 0.0;
        long count = 0;
        for (int i = 0; i < train.num_series(); ++i)
            for (int t = 0; t < train.num_steps(); ++t)
                if (train.observed(i, t, v)) {
                    const double x = train.value(i, t, v);
                    sum += x;
                    sumsq += x * x;
                    ++count;
                }
        if (count == 0)
            throw DataError("variable " + std::to_string(v) + " has no observed training cells");
        const double mean = sum / static_cast<double>(count);
        double var = sumsq / static_cast<double>(count) - mean * mean;
        if (var < 0.0) var = 0.0;
        double sd = std::sqrt(var);
        if (sd == 0.0) sd = 1.0;  // constant variable
        stats.mean[static_cast<std::size_t>(v)] = mean;
        stats.stddev[static_cast<std::size_t>(v)] = sd;
    }
    return stats;
}

TimeSeriesDataset apply_standardization(const TimeSeriesDataset& ds,
                                        const StandardizationStats& stats) {
    if (static_cast<int>(stats.mean.size()) != ds.num_variables())
        throw std::invalid_argument("standardization statistics do not match variable count");
    TimeSeriesDataset out = ds;
    for (int i = 0; i < ds.num_series(); ++i)
        for (int t = 0; t < ds.num_steps(); ++t)
            for (int v = 0; v < ds.num_variables(); ++v)
                if (ds.observed(i, t, v)) {
                    const auto vi = static_cast<std::size_t>(v);
                    out.fill_value(i, t, v,
                                   (ds.value(i, t, v) - stats.mean[vi]) / stats.stddev[vi]);
                }
    return out;
}

std::pair<TimeSeriesDataset, StandardizationStats> standardize(
    const TimeSeriesDataset& train, const TimeSeriesDataset& apply_to) {
    StandardizationStats stats = compute_standardization(train);
    return {apply_standardization(apply_to, stats), std::move(stats)};
}

// ---------------------------------------------------------------------------
// Flattening and splitting
// ---------------------------------------------------------------------------

Matrix flatten(const TimeSeriesDataset& ds) {
    const int N = ds.num_series(), T = ds.num_steps(), V = ds.num_variables();
    Matrix out(N, T * V);
    for (int i = 0; i < N; ++i)
        for (int t = 0; t < T; ++t)
            for (int v = 0; v < V; ++v) {
                const double x = ds.value(i, t, v);
                if (!std::isfinite(x))
                    throw DataError("flatten requires a fully imputed dataset (series " +
                                    std::to_string(i) + ")");
                out(i, t * V + v) = x;
            }
    return out;
}

TimeSeriesDataset unflatten(const Matrix& flat, int t, int v) {
    if (flat.cols() != static_cast<Eigen::Index>(t) * v)
        throw std::invalid_argument("unflatten: column count does not equal T*V");
    TimeSeriesDataset ds(static_cast<int>(flat.rows()), t, v);
    for (int i = 0; i < flat.rows(); ++i)
        for (int tt = 0; tt < t; ++tt)
            for (int vv = 0; vv < v; ++vv) ds.set_value(i, tt, vv, flat(i, tt * v + vv));
    return ds;
}

std::pair<TimeSeriesDataset, TimeSeriesDataset> split_train_test(
    const TimeSeriesDataset& ds, double train_fraction) {
    if (!(train_fraction > 0.0 && train_fraction < 1.0))
        throw std::invalid_argument("train fraction must lie in (0,1)");
    const int N = ds.num_series();
    const int n_train = static_cast<int>(std::floor(static_cast<double>(N) * train_fraction));
    if (n_train < 1 || n_train >= N)
        throw DataError("split would leave an empty train or test set (N=" + std::to_string(N) +
                        ")");
    const int T = ds.num_steps(), V = ds.num_variables();
    TimeSeriesDataset train(n_train, T, V), test(N - n_train, T, V);
    for (int i = 0; i < N; ++i) {
        TimeSeriesDataset& dst = i < n_train ? train : test;
        const int j = i < n_train ? i : i - n_train;
        for (int t = 0; t < T; ++t)
            for (int v = 0; v < V; ++v)
                if (ds.observed(i, t, v)) dst.set_value(j, t, v, ds.value(i, t, v));
    }
    if (ds.labels) {
        train.labels.emplace(ds.labels->begin(), ds.labels->begin() + n_train);
        test.labels.emplace(ds.labels->begin() + n_train, ds.labels->end());
    }
    train.variable_names = ds.variable_names;
    test.variable_names = ds.variable_names;
    return {std::move(train), std::move(test)};
}

// ---------------------------------------------------------------------------
// File formats
// ---------------------------------------------------------------------------

std::string format_double(double x) {
    if (std::isnan(x)) return "NaN";
    char buf[40];
    const auto res = std::to_chars(buf, buf + sizeof(buf), x);
    return std::string(buf, res.ptr);
}

void write_file_atomic(const std::string& path, const std::string& content) {
    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw DataError("cannot open '" + tmp + "' for writing");
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
        if (!out) throw DataError("write failed for '" + tmp + "'");
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) throw DataError("cannot rename '" + tmp + "' to '" + path + "': " + ec.message());
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

TimeSeriesDataset load_dataset(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open dataset file '" + path + "'");
    std::string line;
    if (!std::getline(in, line)) throw DataError("empty dataset file '" + path + "'");
    const auto header = split_line(line);
    if (header.size() != 4)
        throw DataError("malformed header in '" + path + "' (expected N,T,V,has_labels)");
    const long N = parse_int(header[0], "header");
    const long T = parse_int(header[1], "header");
    const long V = parse_int(header[2], "header");
    const long has_labels = parse_int(header[3], "header");
    if (N <= 0 || T <= 0 || V <= 0 || (has_labels != 0 && has_labels != 1))
        throw DataError("malformed header values in '" + path + "'");

    TimeSeriesDataset ds(static_cast<int>(N), static_cast<int>(T), static_cast<int>(V));
    for (long i = 0; i < N; ++i) {
        for (long t = 0; t < T; ++t) {
            if (!std::getline(in, line))
                throw DataError("unexpected end of file in '" + path + "': declared N=" +
                                std::to_string(N) + " disagrees with row count");
            const auto cells = split_line(line);
            if (static_cast<long>(cells.size()) != V)
                throw DataError("ragged row (series " + std::to_string(i) + ", step " +
                                std::to_string(t) + ") in '" + path + "'");
            for (long v = 0; v < V; ++v) {
                const std::string context =
                    "series " + std::to_string(i) + ", step " + std::to_string(t);
                const double x = parse_value(cells[static_cast<std::size_t>(v)], context);
                if (!std::isnan(x))
                    ds.set_value(static_cast<int>(i), static_cast<int>(t), static_cast<int>(v), x);
            }
        }
    }
    if (has_labels == 1) {
        if (!std::getline(in, line)) throw DataError("missing label line in '" + path + "'");
        const auto cells = split_line(line);
        if (static_cast<long>(cells.size()) != N)
            throw DataError("label count does not match N in '" + path + "'");
        std::vector<int> labels(static_cast<std::size_t>(N));
        for (long i = 0; i < N; ++i) {
            const long y = parse_int(cells[static_cast<std::size_t>(i)], "label line");
            if (y != 0 && y != 1)
                throw DataError("label outside {0,1} in '" + path + "'");
            labels[static_cast<std::size_t>(i)] = static_cast<int>(y);
        }
        ds.labels = std::move(labels);
    }
    while (std::getline(in, line))
        if (!strip(line).empty())
            throw DataError("trailing content after declared rows in '" + path + "'");
    ds.validate();
    return ds;
}

void save_dataset(const TimeSeriesDataset& ds, const std::string& path) {
    std::string out;
    out += std::to_string(ds.num_series()) + "," + std::to_string(ds.num_steps()) + "," +
           std::to_string(ds.num_variables()) + "," + (ds.labels ? "1" : "0") + "\n";
    for (int i = 0; i < ds.num_series(); ++i)
        for (int t = 0; t < ds.num_steps(); ++t) {
            for (int v = 0; v < ds.num_variables(); ++v) {
                if (v) out += ",";
                out += ds.observed(i, t, v) ? format_double(ds.value(i, t, v)) : "NaN";
            }
            out += "\n";
        }
    if (ds.labels) {
        for (int i = 0; i < ds.num_series(); ++i) {
            if (i) out += ",";
            out += std::to_string((*ds.labels)[static_cast<std::size_t>(i)]);
        }
        out += "\n";
    }
    write_file_atomic(path, out);
}

Matrix load_matrix_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open matrix file '" + path + "'");
    std::string line;
    if (!std::getline(in, line)) throw DataError("empty matrix file '" + path + "'");
    const auto header = split_line(line);
    if (header.size() != 2)
        throw DataError("malformed matrix header in '" + path + "' (expected rows,cols)");
    const long rows = parse_int(header[0], "matrix header");
    const long cols = parse_int(header[1], "matrix header");
    if (rows <= 0 || cols <= 0) throw DataError("non-positive matrix shape in '" + path + "'");
    Matrix m(rows, cols);
    for (long r = 0; r < rows; ++r) {
        if (!std::getline(in, line))
            throw DataError("unexpected end of matrix file '" + path + "'");
        const auto cells = split_line(line);
        if (static_cast<long>(cells.size()) != cols)
            throw DataError("ragged matrix row " + std::to_string(r) + " in '" + path + "'");
        for (long c = 0; c < cols; ++c) {
            const double x =
                parse_value(cells[static_cast<std::size_t>(c)], "matrix row " + std::to_string(r));
            if (std::isnan(x))
                throw DataError("NaN entry in matrix file '" + path + "'");
            m(r, c) = x;
        }
    }
    return m;
}

void save_matrix_csv(const Matrix& m, const std::string& path) {
    std::string out;
    out += std::to_string(m.rows()) + "," + std::to_string(m.cols()) + "\n";
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        for (Eigen::Index c = 0; c < m.cols(); ++c) {
            if (c) out += ",";
            out += format_double(m(r, c));
        }
        out += "\n";
    }
    write_file_atomic(path, out);
}

}  // namespace tckae
