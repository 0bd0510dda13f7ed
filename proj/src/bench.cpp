#include "stairkit/bench.hpp"

#include "stairkit/error.hpp"
#include "stairkit/label_codec.hpp"
#include "stairkit/line_linker.hpp"
#include "stairkit/reconstruct.hpp"
#include "stairkit/synth.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <random>

#include <fmt/format.h>

namespace stairkit {

namespace {

using Clock = std::chrono::steady_clock;

double elapsed_ms(Clock::time_point since) {
    return std::chrono::duration<double, std::milli>(Clock::now() - since).count();
}

StageTiming summarize(std::string name, std::vector<double> samples) {
    std::sort(samples.begin(), samples.end());
    const auto pick = [&](double q) {
        const auto idx = static_cast<std::size_t>(std::ceil(q * static_cast<double>(samples.size()))) - 1;
        return samples[std::min(idx, samples.size() - 1)];
    };
    const std::size_t n = samples.size();
    const double median = n % 2 ? samples[n / 2] : 0.5 * (samples[n / 2 - 1] + samples[n / 2]);
    return {std::move(name), median, pick(0.95)};
}

// One-hot mask turned into soft scores with the same argmax.
TensorGrid soften(const TensorGrid& one_hot, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(0.0, 0.3);
    TensorGrid scores({one_hot.rows(), one_hot.cols(), kNumClasses});
    for (std::size_t i = 0; i < one_hot.size(); ++i)
        scores.data()[i] = static_cast<float>(0.6 * one_hot.data()[i] + u(rng));
    return scores;
}

}  // namespace

BenchReport bench_pipeline(const BenchConfig& cfg) {
    if (cfg.iters < 10) throw Error(fmt::format("bench needs at least 10 iterations, got {}", cfg.iters));
    std::mt19937_64 rng(cfg.seed);
    const GridGeometry geom;
    const SceneTruth label_scene = generate_scene(sample_stair_spec(rng, 4, geom.input_h, geom.input_w));
    const EncodedLabels labels = noisy_labels(label_scene, {0.02, 0.2, cfg.seed}, geom);
    const SceneTruth scene = generate_scene(sample_stair_spec(rng, 4, cfg.height, cfg.width));
    const TensorGrid scores = soften(scene.seg, cfg.seed);
    const LinkerConfig link_cfg = LinkerConfig::for_geometry(geom);

    std::vector<double> link_ms, harden_ms, depth_ms, rebuild_ms, whole_ms;
    std::size_t points = 0, line_count = 0;
    for (std::size_t it = 0; it < cfg.iters; ++it) {
        const auto start = Clock::now();
        auto t = Clock::now();
        const LinkedLines lines = link_lines(labels, link_cfg, geom);
        link_ms.push_back(elapsed_ms(t));

        t = Clock::now();
        const TensorGrid mask = harden_mask(scores, cfg.threads);
        harden_ms.push_back(elapsed_ms(t));

        t = Clock::now();
        const TensorGrid riser_depth = class_depth(scene.depth, mask, SurfaceClass::Riser, cfg.threads);
        const TensorGrid tread_depth = class_depth(scene.depth, mask, SurfaceClass::Tread, cfg.threads);
        depth_ms.push_back(elapsed_ms(t));

        t = Clock::now();
        const PointCloud risers = reconstruct_cloud(riser_depth, mask, scene.spec.k, SurfaceClass::Riser, nullptr, cfg.threads);
        const PointCloud treads = reconstruct_cloud(tread_depth, mask, scene.spec.k, SurfaceClass::Tread, nullptr, cfg.threads);
        rebuild_ms.push_back(elapsed_ms(t));
        whole_ms.push_back(elapsed_ms(start));
        points = risers.size() + treads.size();
        line_count = lines.convex.lines.size() + lines.concave.lines.size();
    }

    BenchReport report;
    report.threads = cfg.threads;
    report.iters = cfg.iters;
    report.points = points;
    report.lines = line_count;
    report.budget_ms = cfg.threads > 1 ? kMultiThreadBudgetMs : kSingleThreadBudgetMs;
    report.stages = {summarize("post-processing of CNN outputs", std::move(link_ms)),
                     summarize("mask hardening", std::move(harden_ms)),
                     summarize("processing of depth image", std::move(depth_ms)),
                     summarize("rebuilding point cloud", std::move(rebuild_ms)),
                     summarize("whole process", std::move(whole_ms))};
    return report;
}

std::string format_bench(const BenchReport& r) {
    std::string out = fmt::format("threads = {}\niters = {}\nlines = {}\npoints = {}\n", r.threads, r.iters, r.lines, r.points);
    out += fmt::format("{:<32} {:>10} {:>10}\n", "stage", "median_ms", "p95_ms");
    for (const auto& s : r.stages) out += fmt::format("{:<32} {:>10.3f} {:>10.3f}\n", s.name, s.median_ms, s.p95_ms);
    out += fmt::format("budget_ms = {}\nwithin_budget = {}\nstable = {}\n", r.budget_ms, r.within_budget() ? 1 : 0,
                       r.stable() ? 1 : 0);
    return out;
}

}  // namespace stairkit
