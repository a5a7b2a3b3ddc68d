#pragma once

#include <semipart/demand.hpp>
#include <semipart/model.hpp>

#include <cstdint>
#include <ostream>
#include <random>
#include <string>
#include <vector>

namespace semipart {

/// Seeded generator with fixed value mappings, so a seed yields the same
/// draws on every standard library.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next() { return engine_(); }
    /// Uniform in (0, 1].
    double unit();
    /// Uniform integer in [lo, hi].
    std::int64_t between(std::int64_t lo, std::int64_t hi);

private:
    std::mt19937_64 engine_;
};

enum class UtilizationSampler {
    /// Draw u in (0,1] until the target is reached, cutting the last draw.
    SequentialTruncate,
    /// UUniFast over a fixed task count, discarding draws with some u > 1.
    Simplex,
};

inline constexpr Ticks kMinPeriod = 100;
inline constexpr Ticks kMaxPeriod = 3000;

/// Random implicit-deadline system whose utilizations sum to
/// cpu_count * util_fraction (before rounding C to whole ticks).
TaskSystem generate_task_system(std::size_t cpu_count, double util_fraction, Rng& rng,
                                UtilizationSampler sampler = UtilizationSampler::SequentialTruncate);

enum class SweepMode { Ffd, Packed, Pattern };

const char* to_string(SweepMode mode);
SweepMode parse_sweep_mode(const std::string& name);

struct SweepConfig {
    std::vector<std::size_t> cpu_counts{2, 4};
    /// Per-CPU utilization in hundredths, 50..95.
    std::vector<int> util_percents{50, 55, 60, 65, 70, 75, 80, 85, 90, 95};
    std::vector<std::size_t> k_values{2};
    std::vector<SweepMode> modes{SweepMode::Ffd, SweepMode::Packed, SweepMode::Pattern};
    std::size_t trials{100};
    std::uint64_t seed{1};
    Ticks horizon_cap{kDefaultHorizonCap};
    UtilizationSampler sampler{UtilizationSampler::SequentialTruncate};
    /// 0 picks the hardware concurrency.
    unsigned workers{0};

    /// Throws std::invalid_argument on an empty axis, zero trials or a
    /// fraction outside [0.50, 0.95].
    void validate() const;
};

struct SweepRow {
    std::size_t cpus{};
    int util_percent{};
    std::size_t frames{};
    SweepMode mode{};
    std::size_t trials{};
    std::size_t successes{};
    std::size_t overflows{};

    double ratio() const { return trials == 0 ? 0.0 : static_cast<double>(successes) / static_cast<double>(trials); }
};

/// Seed of one trial system. Independent of K and mode so every algorithm
/// sees the same systems.
std::uint64_t trial_seed(std::uint64_t master, std::size_t cpus, int util_percent, std::size_t trial);

/// Success counts per (m, fraction, K, mode). FFD is reported once per
/// (m, fraction) with K = 1. Output does not depend on the worker count.
std::vector<SweepRow> run_sweep(const SweepConfig& config);

void write_sweep_csv(std::ostream& out, const std::vector<SweepRow>& rows);

}  // namespace semipart
