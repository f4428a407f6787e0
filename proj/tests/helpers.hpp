#ifndef TCKAE_TESTS_HELPERS_HPP
#define TCKAE_TESTS_HELPERS_HPP

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "tckae/core.hpp"
#include "tckae/rng.hpp"

namespace testutil {

/// Dataset from row-major cells (series, then time, then variable); NaN marks
/// a missing cell.
inline tckae::TimeSeriesDataset make_dataset(int n, int t, int v,
                                             const std::vector<double>& cells,
                                             std::optional<std::vector<int>> labels = {}) {
    tckae::TimeSeriesDataset ds(n, t, v);
    std::size_t idx = 0;
    for (int i = 0; i < n; ++i)
        for (int tt = 0; tt < t; ++tt)
            for (int vv = 0; vv < v; ++vv, ++idx)
                if (!std::isnan(cells[idx])) ds.set_value(i, tt, vv, cells[idx]);
    ds.labels = std::move(labels);
    return ds;
}

/// Random standardized-looking dataset with the given missing rate. Every
/// series keeps at least 2 observed cells.
inline tckae::TimeSeriesDataset random_dataset(tckae::Rng& rng, int n, int t, int v,
                                               double missing_rate) {
    tckae::TimeSeriesDataset ds(n, t, v);
    for (int i = 0; i < n; ++i) {
        int observed = 0;
        while (observed < 2) {
            observed = 0;
            for (int tt = 0; tt < t; ++tt)
                for (int vv = 0; vv < v; ++vv) {
                    if (rng.uniform() < missing_rate) {
                        ds.set_missing(i, tt, vv);
                    } else {
                        ds.set_value(i, tt, vv, rng.normal());
                        ++observed;
                    }
                }
        }
    }
    return ds;
}

struct TempDir {
    std::filesystem::path path;

    TempDir() {
        const auto base = std::filesystem::temp_directory_path();
        for (int attempt = 0;; ++attempt) {
            auto candidate = base / ("tckae_test_" + std::to_string(::getpid()) + "_" +
                                     std::to_string(counter()++));
            std::error_code ec;
            if (std::filesystem::create_directory(candidate, ec)) {
                path = candidate;
                return;
            }
            if (attempt > 100) throw std::runtime_error("cannot create temp dir");
        }
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    std::string file(const std::string& name) const { return (path / name).string(); }

private:
    static int& counter() {
        static int c = 0;
        return c;
    }
};

}  // namespace testutil

#endif  // TCKAE_TESTS_HELPERS_HPP
