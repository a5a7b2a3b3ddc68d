#pragma once

#include <semipart/model.hpp>

#include <cstdint>
#include <optional>
#include <ostream>
#include <variant>
#include <vector>

namespace semipart {

/// All tasks release their first job at 0 and then exactly every T.
struct SynchronousPeriodic {};

/// First release and every inter-arrival stretched by a random delay in
/// [0, max_jitter]; inter-arrivals never drop below T.
struct SporadicSeeded {
    std::uint64_t seed{};
    Ticks max_jitter{};
};

using ReleaseModel = std::variant<SynchronousPeriodic, SporadicSeeded>;

struct SimConfig {
    TaskSystem system;
    AssignmentPlan plan;
    Ticks horizon{};
    ReleaseModel release_model{SynchronousPeriodic{}};
    bool record_trace{false};
};

struct DeadlineMiss {
    TaskId task{};
    std::uint64_t job{};
    CpuIndex cpu{};
    Ticks deadline{};
    /// Empty when the job had not finished by the horizon.
    std::optional<Ticks> completion;
};

enum class TraceKind { Release, Start, Preempt, Resume, Complete, Miss };

const char* to_string(TraceKind kind);

struct TraceEvent {
    Ticks time{};
    TraceKind kind{};
    TaskId task{};
    std::uint64_t job{};
    CpuIndex cpu{};
};

struct SimReport {
    std::vector<DeadlineMiss> misses;
    std::size_t migrations{};
    std::size_t preemptions{};
    std::size_t jobs_released{};
    std::vector<TraceEvent> trace;

    bool miss_free() const { return misses.empty(); }
};

/// Preemptive EDF on every CPU with jobs routed by the plan. Throws
/// ModelError for plans that reference unknown tasks or CPUs or leave a
/// task uncovered.
SimReport run_simulation(const SimConfig& config);

/// One line per event: `time event task job cpu`.
void write_trace(std::ostream& out, const std::vector<TraceEvent>& trace);

}  // namespace semipart
