#pragma once

#include <semipart/model.hpp>

#include <functional>
#include <stdexcept>
#include <vector>

namespace semipart {

/// Everything the analysis sees on one CPU: its non-migrating tasks and the
/// multiframe images of migrating tasks that have jobs there.
struct CpuWorkload {
    std::vector<Task> fixed_tasks;
    std::vector<MultiframeTask> multiframes;

    bool empty() const { return fixed_tasks.empty() && multiframes.empty(); }
};

struct TestPointSet {
    std::vector<Ticks> points;
    Ticks horizon{};
    bool truncated{false};
};

enum class TestMode { Packed, Pattern };

const char* to_string(TestMode mode);

class HorizonOverflowError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Floor division rounding toward negative infinity.
constexpr std::int64_t floor_div(std::int64_t num, std::int64_t den) {
    auto q = num / den;
    if ((num % den != 0) && ((num < 0) != (den < 0))) {
        --q;
    }
    return q;
}

Ticks dbf_classic(const Task& task, Ticks time);

/// sup over deadlines of DBF(t)/t for a set of non-migrating tasks.
/// Throws HorizonOverflowError when the hyperperiod exceeds `cap`.
Rational load(const CpuWorkload& workload, Ticks cap = kDefaultHorizonCap);

/// Whole super-periods of length K*T completed by `time`.
std::int64_t super_period_count(Ticks time, std::int64_t frames, Ticks period);

/// Jobs with a deadline inside the trailing partial super-period, clamped
/// at zero.
std::int64_t residual_job_count(Ticks time, std::int64_t frames, Ticks period, Ticks deadline);

/// Length of the frame window considered by the pattern-aware bound. Same
/// value as residual_job_count; the clamp at zero makes an empty window
/// contribute nothing.
std::int64_t pattern_window_length(Ticks time, std::int64_t frames, Ticks period, Ticks deadline);

/// Demand bound of a multiframe image assuming its nonzero frames come
/// first.
Ticks dbf_packed(const MultiframeTask& mf, Ticks time);

/// Demand bound of a multiframe image taking its actual frame pattern into
/// account, maximized over every cyclic starting frame.
Ticks dbf_pattern(const MultiframeTask& mf, Ticks time);

/// Sum of C/T over fixed tasks plus l*C/(K*T) over multiframes.
Rational density(const CpuWorkload& workload);

/// lcm of T (fixed) and K*T (multiframes). Returns cap + 1 once the running
/// lcm exceeds cap. 0 for an empty workload.
Ticks hyperperiod(const CpuWorkload& workload, Ticks cap);

/// Calls `visit` on every absolute deadline of every member in (0, horizon],
/// in increasing order without duplicates. Stops early when `visit` returns
/// false.
void for_each_deadline(const CpuWorkload& workload, Ticks horizon,
                       const std::function<bool(Ticks)>& visit);

/// All absolute deadlines up to the hyperperiod, or up to `cap` (flagged as
/// truncated) when the hyperperiod is larger.
TestPointSet test_points(const CpuWorkload& workload, Ticks cap);

/// Demand of a whole workload at arbitrary time points. Builds the
/// max-window tables of each multiframe once, so every evaluation costs
/// O(members).
class WorkloadDemand {
public:
    WorkloadDemand(const CpuWorkload& workload, TestMode mode);

    Ticks operator()(Ticks time) const;

private:
    struct FrameTerm {
        Ticks deadline;
        Ticks period;
        std::int64_t frames;
        Ticks per_super_period;
        /// best_window[n]: largest demand of n consecutive frames.
        std::vector<Ticks> best_window;
    };

    std::vector<Task> fixed_;
    std::vector<FrameTerm> terms_;
};

/// Largest sum over n cyclically consecutive frames, for n in [0, K].
std::vector<Ticks> max_window_sums(std::span<const Ticks> frames);

/// Smallest horizon past which the workload's demand provably stays below
/// supply. Empty when the density is exactly one (no slack to exploit).
std::optional<Ticks> slack_horizon(const CpuWorkload& workload, Ticks cap);

/// Uniprocessor EDF test with the extended demand bounds. Multiframes are
/// evaluated packed (mode Packed) or with their pattern (mode Pattern).
Verdict schedulability_test(const CpuWorkload& workload, TestMode mode,
                            Ticks cap = kDefaultHorizonCap, CpuIndex cpu = 0);

}  // namespace semipart
