#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

namespace stairkit {

struct BenchConfig {
    std::size_t height = 480;
    std::size_t width = 640;
    std::size_t iters = 100;
    std::size_t threads = 1;
    std::uint64_t seed = 0;
};

struct StageTiming {
    std::string name;
    double median_ms = 0;
    double p95_ms = 0;
};

/// Four stage rows followed by the whole-process row.
struct BenchReport {
    std::vector<StageTiming> stages;
    std::size_t threads = 1;
    std::size_t iters = 0;
    std::size_t lines = 0;   ///< equations linked per iteration
    std::size_t points = 0;  ///< riser + tread points rebuilt per iteration
    double budget_ms = 0;    ///< whole-process median budget for this thread count

    const StageTiming& whole() const { return stages.back(); }
    bool within_budget() const { return whole().median_ms < budget_ms; }
    /// Whole-process p95 is no more than twice its median.
    bool stable() const { return whole().p95_ms <= 2.0 * whole().median_ms; }
};

/// Single-threaded whole-process budget and the budget with worker threads.
inline constexpr double kSingleThreadBudgetMs = 50.0;
inline constexpr double kMultiThreadBudgetMs = 20.0;

/**
 * Times line linking, mask hardening, per-class depth masking and point cloud
 * rebuilding on synthetic inputs. Needs iters >= 10.
 */
BenchReport bench_pipeline(const BenchConfig& cfg);

std::string format_bench(const BenchReport& report);

}  // namespace stairkit
