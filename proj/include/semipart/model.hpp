#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace semipart {

/// Time in integer ticks. Signed so that floor arithmetic on negative
/// numerators (residual windows shorter than a deadline) stays natural.
using Ticks = std::int64_t;
using TaskId = std::int64_t;
using CpuIndex = std::size_t;

/// Exact rational used for utilizations, densities and loads.
using Rational = boost::multiprecision::cpp_rational;

inline constexpr Ticks kDefaultHorizonCap = 100'000'000;

class ModelError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Sporadic constrained-deadline task (C, D, T).
struct Task {
    TaskId id{};
    Ticks wcet{};
    Ticks deadline{};
    Ticks period{};

    friend bool operator==(const Task&, const Task&) = default;
};

Rational utilization(const Task& task);

struct TaskSystem {
    std::vector<Task> tasks;
    std::size_t cpu_count{};

    const Task* find(TaskId id) const;
    Rational total_utilization() const;
    Rational max_utilization() const;
};

/// Task record as read from input, before any validation.
struct RawTask {
    std::int64_t id{};
    std::int64_t wcet{};
    std::int64_t deadline{};
    std::int64_t period{};
};

/// Checks every task invariant and builds the system. Throws ModelError
/// naming the offending task.
TaskSystem validate_system(std::span<const RawTask> raw, std::int64_t cpu_count);

/// Per-CPU image of a migrating task: a cyclic vector of K frames, each
/// either 0 or the source task's WCET.
struct MultiframeTask {
    TaskId source{};
    Ticks wcet{};
    std::vector<Ticks> frames;
    Ticks deadline{};
    Ticks period{};

    /// Builds the image of `task` that executes the jobs whose bit is set.
    static MultiframeTask from_bits(const Task& task, std::span<const std::uint8_t> bits);

    std::size_t frame_count() const { return frames.size(); }
    std::size_t nonzero_count() const;
    bool occupies(std::size_t position) const { return frames.at(position) != 0; }

    /// Throws ModelError when frames are empty or a nonzero frame differs
    /// from the WCET.
    void validate() const;

    friend bool operator==(const MultiframeTask&, const MultiframeTask&) = default;
};

/// Same frame count and nonzero count, with the nonzero frames moved to
/// the front.
MultiframeTask packed_form(const MultiframeTask& mf);

/// A task whose jobs are spread over several CPUs by a cyclic sequence.
struct MigratingAssignment {
    TaskId task{};
    /// Jobs among K consecutive jobs that run on each CPU (row of A).
    std::vector<std::size_t> jobs_per_cpu;
    /// Job q runs on sequence[q mod K].
    std::vector<CpuIndex> sequence;
    /// One image per CPU holding at least one job, ascending CPU order.
    std::vector<std::pair<CpuIndex, MultiframeTask>> images;
};

struct AssignmentPlan {
    std::size_t frame_count{1};  // K
    std::size_t cpu_count{};
    std::map<TaskId, CpuIndex> fixed;
    std::vector<MigratingAssignment> migrating;

    const MigratingAssignment* find_migrating(TaskId id) const;
    bool covers(TaskId id) const;
    CpuIndex cpu_for_job(TaskId id, std::uint64_t job_index) const;

    /// n x m job-count matrix in system task order; fixed tasks carry K on
    /// their CPU.
    std::vector<std::vector<std::size_t>> job_matrix(const TaskSystem& system) const;

    std::vector<std::vector<MultiframeTask>> per_cpu_multiframes() const;

    /// Throws ModelError unless row sums equal K, frame positions partition
    /// across CPUs and the sequence agrees with the images.
    void check_invariants(const TaskSystem& system) const;
};

enum class VerdictStatus { Schedulable, NotSchedulable, HorizonOverflow };

const char* to_string(VerdictStatus status);

struct CpuVerdict {
    CpuIndex cpu{};
    VerdictStatus status{VerdictStatus::Schedulable};
    /// Long-run demand rate: sum of C/T plus l*C/(K*T).
    Rational density;
    /// First time point where demand exceeds supply, if one was found.
    std::optional<Ticks> violation_time;
    Ticks demand_at_violation{};
    /// Least common multiple of member periods, saturated above the cap.
    Ticks hyperperiod{};
    /// Last time point that had to be checked.
    Ticks horizon{};
    bool truncated{false};
};

struct Verdict {
    VerdictStatus status{VerdictStatus::Schedulable};
    std::vector<CpuVerdict> per_cpu;

    bool schedulable() const { return status == VerdictStatus::Schedulable; }
};

}  // namespace semipart
