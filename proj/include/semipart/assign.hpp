#pragma once

#include <semipart/demand.hpp>
#include <semipart/model.hpp>

#include <functional>
#include <optional>
#include <span>
#include <vector>

namespace semipart {

struct BitPattern {
    std::vector<std::uint8_t> bits;
    std::size_t ones{};

    std::size_t size() const { return bits.size(); }
    friend bool operator==(const BitPattern&, const BitPattern&) = default;
};

/// Spreads `count` ones over `frames` positions as evenly as possible:
/// bit l is ceil((l+1)*count/frames) - ceil(l*count/frames).
BitPattern regular_pattern(std::size_t frames, std::size_t count);

/// Cyclic CPU sequence built from one pattern per CPU: positions are
/// scanned in order and, within a position, CPUs in index order. Throws
/// std::invalid_argument when the patterns do not hold exactly K ones.
std::vector<CpuIndex> flatten_sequence(std::span<const BitPattern> per_cpu, std::size_t frames);

/// Job spreading when the job count of every CPU is known up front.
MigratingAssignment most_regular_assign(const Task& task, std::size_t frames,
                                        std::span<const std::size_t> counts);

/// Lays `pending` over the positions left free by `prior`: occupied
/// positions stay 0, the q-th free position takes the q-th pending bit.
MultiframeTask merge_frames(std::span<const MultiframeTask> prior, const BitPattern& pending,
                            const Task& task, std::size_t frames);

/// Decides whether a CPU can take the candidate image on top of what it
/// already holds.
using CpuProbe = std::function<bool(const MultiframeTask& candidate, CpuIndex cpu)>;

/// CPU-by-CPU job assignment: each CPU in index order receives the largest
/// job count (from the remaining jobs down to 1) whose image it accepts.
/// Empty when jobs remain after the last CPU.
std::optional<MigratingAssignment> alternative_assign(const Task& task, std::size_t frames,
                                                      std::size_t cpu_count, const CpuProbe& probe);

/// Same descending search, but only the job count matters: the probe sees
/// packed images and the final images come from most_regular_assign.
std::optional<MigratingAssignment> packed_count_assign(const Task& task, std::size_t frames,
                                                       std::size_t cpu_count, const CpuProbe& probe);

/// Decreasing utilization, ties by ascending id.
std::vector<Task> ffd_order(const TaskSystem& system);

struct FfdResult {
    AssignmentPlan plan;
    std::vector<TaskId> leftovers;
};

/// First-fit decreasing placement of whole tasks, each CPU checked with the
/// schedulability test of `mode`.
FfdResult ffd_assign(const TaskSystem& system, TestMode mode, Ticks cap = kDefaultHorizonCap);

struct PartitionResult {
    AssignmentPlan plan;
    Verdict verdict;
    /// First task that could not be placed, if any.
    std::optional<TaskId> failed_task;
    /// Schedulability tests performed.
    std::size_t probes{};
};

/// Semi-partitioning: FFD per task, falling back to job-level splitting
/// over the CPUs when no CPU takes the whole task.
PartitionResult semi_partition(const TaskSystem& system, std::size_t frames, TestMode mode,
                               Ticks cap = kDefaultHorizonCap);

/// Workload each CPU actually runs under `plan`.
std::vector<CpuWorkload> realize_workloads(const TaskSystem& system, const AssignmentPlan& plan);

/// Runs the schedulability test on every CPU of a plan.
Verdict verify_plan(const TaskSystem& system, const AssignmentPlan& plan, TestMode mode,
                    Ticks cap = kDefaultHorizonCap);

}  // namespace semipart
