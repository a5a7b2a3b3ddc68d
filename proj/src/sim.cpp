#include <semipart/sim.hpp>

#include <algorithm>
#include <queue>
#include <random>
#include <tuple>

namespace semipart {

const char* to_string(TraceKind kind) {
    switch (kind) {
        case TraceKind::Release:
            return "release";
        case TraceKind::Start:
            return "start";
        case TraceKind::Preempt:
            return "preempt";
        case TraceKind::Resume:
            return "resume";
        case TraceKind::Complete:
            return "complete";
        case TraceKind::Miss:
            return "miss";
    }
    return "unknown";
}

namespace {

struct Job {
    TaskId task;
    std::uint64_t index;
    Ticks release;
    Ticks deadline;
    Ticks remaining;
    bool started{false};
    std::optional<Ticks> completion;
};

// EDF priority with (task id, job index) tie-break; true when a runs first.
bool runs_before(const Job& a, const Job& b) {
    return std::tie(a.deadline, a.task, a.index) < std::tie(b.deadline, b.task, b.index);
}

std::vector<Ticks> release_times(const Task& task, Ticks horizon, const ReleaseModel& model) {
    std::vector<Ticks> out;
    if (std::holds_alternative<SynchronousPeriodic>(model)) {
        for (Ticks t = 0; t < horizon; t += task.period) {
            out.push_back(t);
        }
        return out;
    }
    const auto& sporadic = std::get<SporadicSeeded>(model);
    std::mt19937_64 rng(sporadic.seed ^ (static_cast<std::uint64_t>(task.id) * 0x9E3779B97F4A7C15ULL));
    auto jitter = [&] {
        return sporadic.max_jitter > 0 ? static_cast<Ticks>(rng() % static_cast<std::uint64_t>(sporadic.max_jitter + 1))
                                       : Ticks{0};
    };
    for (Ticks t = jitter(); t < horizon; t += task.period + jitter()) {
        out.push_back(t);
    }
    return out;
}

class CpuTimeline {
public:
    CpuTimeline(CpuIndex cpu, std::vector<Job> jobs, SimReport& report, bool trace)
        : cpu_(cpu), jobs_(std::move(jobs)), report_(report), trace_(trace) {
        std::sort(jobs_.begin(), jobs_.end(), [](const Job& a, const Job& b) {
            return std::tie(a.release, a.task, a.index) < std::tie(b.release, b.task, b.index);
        });
    }

    void run(Ticks horizon) {
        auto later = [this](std::size_t a, std::size_t b) { return runs_before(jobs_[b], jobs_[a]); };
        std::priority_queue<std::size_t, std::vector<std::size_t>, decltype(later)> ready(later);
        std::size_t next_release = 0;
        std::optional<std::size_t> running;
        Ticks now = 0;

        while (now < horizon) {
            // admit every release due now
            while (next_release < jobs_.size() && jobs_[next_release].release <= now) {
                emit(now, TraceKind::Release, jobs_[next_release]);
                ready.push(next_release++);
            }
            if (!ready.empty()) {
                const auto best = ready.top();
                if (!running || runs_before(jobs_[best], jobs_[*running])) {
                    ready.pop();
                    if (running) {
                        ++report_.preemptions;
                        emit(now, TraceKind::Preempt, jobs_[*running]);
                        ready.push(*running);
                    }
                    running = best;
                    emit(now, jobs_[best].started ? TraceKind::Resume : TraceKind::Start, jobs_[best]);
                    jobs_[best].started = true;
                }
            }
            const Ticks release_at = next_release < jobs_.size() ? jobs_[next_release].release : horizon;
            if (!running) {
                now = std::min(release_at, horizon);
                continue;
            }
            auto& job = jobs_[*running];
            const Ticks finish_at = now + job.remaining;
            const Ticks until = std::min({finish_at, release_at, horizon});
            job.remaining -= until - now;
            now = until;
            if (job.remaining == 0) {
                // completion is handled before any release at the same instant
                job.completion = now;
                emit(now, TraceKind::Complete, job);
                running.reset();
            }
        }

        for (const auto& job : jobs_) {
            if (job.deadline > horizon) {
                continue;
            }
            if (!job.completion || *job.completion > job.deadline) {
                report_.misses.push_back({job.task, job.index, cpu_, job.deadline, job.completion});
                emit(job.deadline, TraceKind::Miss, job);
            }
        }
    }

private:
    void emit(Ticks time, TraceKind kind, const Job& job) {
        if (trace_) {
            report_.trace.push_back({time, kind, job.task, job.index, cpu_});
        }
    }

    CpuIndex cpu_;
    std::vector<Job> jobs_;
    SimReport& report_;
    bool trace_;
};

}  // namespace

SimReport run_simulation(const SimConfig& config) {
    if (config.horizon <= 0) {
        throw ModelError("simulation horizon must be positive");
    }
    const auto& system = config.system;
    const auto& plan = config.plan;
    plan.check_invariants(system);
    for (const auto& task : system.tasks) {
        if (!plan.covers(task.id)) {
            throw ModelError("plan does not cover task " + std::to_string(task.id));
        }
    }

    SimReport report;
    std::vector<std::vector<Job>> per_cpu(system.cpu_count);
    for (const auto& task : system.tasks) {
        const auto releases = release_times(task, config.horizon, config.release_model);
        std::optional<CpuIndex> previous;
        for (std::uint64_t q = 0; q < releases.size(); ++q) {
            const auto cpu = plan.cpu_for_job(task.id, q);
            if (previous && *previous != cpu) {
                ++report.migrations;
            }
            previous = cpu;
            per_cpu[cpu].push_back(Job{task.id, q, releases[q], releases[q] + task.deadline, task.wcet, false, std::nullopt});
        }
        report.jobs_released += releases.size();
    }

    for (CpuIndex cpu = 0; cpu < per_cpu.size(); ++cpu) {
        CpuTimeline(cpu, std::move(per_cpu[cpu]), report, config.record_trace).run(config.horizon);
    }
    std::sort(report.misses.begin(), report.misses.end(), [](const DeadlineMiss& a, const DeadlineMiss& b) {
        return std::tie(a.deadline, a.task, a.job) < std::tie(b.deadline, b.task, b.job);
    });
    std::stable_sort(report.trace.begin(), report.trace.end(),
                     [](const TraceEvent& a, const TraceEvent& b) { return a.time < b.time; });
    return report;
}

void write_trace(std::ostream& out, const std::vector<TraceEvent>& trace) {
    for (const auto& e : trace) {
        out << e.time << ' ' << to_string(e.kind) << ' ' << e.task << ' ' << e.job << ' ' << e.cpu << '\n';
    }
}

}  // namespace semipart
