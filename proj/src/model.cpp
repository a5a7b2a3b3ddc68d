#include <semipart/model.hpp>

#include <algorithm>
#include <set>

namespace semipart {

namespace {

std::string task_label(std::int64_t id) {
    return "task " + std::to_string(id);
}

}  // namespace

Rational utilization(const Task& task) {
    return Rational(task.wcet, task.period);
}

const Task* TaskSystem::find(TaskId id) const {
    auto it = std::find_if(tasks.begin(), tasks.end(), [id](const Task& t) { return t.id == id; });
    return it == tasks.end() ? nullptr : &*it;
}

Rational TaskSystem::total_utilization() const {
    Rational sum = 0;
    for (const auto& t : tasks) {
        sum += utilization(t);
    }
    return sum;
}

Rational TaskSystem::max_utilization() const {
    Rational best = 0;
    for (const auto& t : tasks) {
        best = std::max(best, utilization(t));
    }
    return best;
}

TaskSystem validate_system(std::span<const RawTask> raw, std::int64_t cpu_count) {
    if (cpu_count < 1) {
        throw ModelError("cpu count must be at least 1");
    }
    if (raw.empty()) {
        throw ModelError("task system is empty");
    }
    TaskSystem system;
    system.cpu_count = static_cast<std::size_t>(cpu_count);
    std::set<std::int64_t> seen;
    for (const auto& r : raw) {
        const auto label = task_label(r.id);
        if (r.wcet < 1) {
            throw ModelError(label + ": C must be positive");
        }
        if (r.deadline < 1) {
            throw ModelError(label + ": D must be positive");
        }
        if (r.period < 1) {
            throw ModelError(label + ": T must be positive");
        }
        if (r.wcet > r.deadline) {
            throw ModelError(label + ": C exceeds D");
        }
        if (r.deadline > r.period) {
            throw ModelError(label + ": D exceeds T");
        }
        if (!seen.insert(r.id).second) {
            throw ModelError(label + ": duplicate id");
        }
        system.tasks.push_back(Task{r.id, r.wcet, r.deadline, r.period});
    }
    return system;
}

MultiframeTask MultiframeTask::from_bits(const Task& task, std::span<const std::uint8_t> bits) {
    MultiframeTask mf{task.id, task.wcet, {}, task.deadline, task.period};
    mf.frames.reserve(bits.size());
    for (auto b : bits) {
        mf.frames.push_back(b ? task.wcet : 0);
    }
    return mf;
}

std::size_t MultiframeTask::nonzero_count() const {
    return static_cast<std::size_t>(
        std::count_if(frames.begin(), frames.end(), [](Ticks f) { return f != 0; }));
}

void MultiframeTask::validate() const {
    if (frames.empty()) {
        throw ModelError(task_label(source) + ": multiframe image has no frames");
    }
    for (auto f : frames) {
        if (f != 0 && f != wcet) {
            throw ModelError(task_label(source) + ": frame value differs from C");
        }
    }
}

MultiframeTask packed_form(const MultiframeTask& mf) {
    MultiframeTask packed = mf;
    const auto ones = mf.nonzero_count();
    for (std::size_t p = 0; p < packed.frames.size(); ++p) {
        packed.frames[p] = p < ones ? mf.wcet : 0;
    }
    return packed;
}

const MigratingAssignment* AssignmentPlan::find_migrating(TaskId id) const {
    auto it = std::find_if(migrating.begin(), migrating.end(),
                           [id](const MigratingAssignment& m) { return m.task == id; });
    return it == migrating.end() ? nullptr : &*it;
}

bool AssignmentPlan::covers(TaskId id) const {
    return fixed.contains(id) || find_migrating(id) != nullptr;
}

CpuIndex AssignmentPlan::cpu_for_job(TaskId id, std::uint64_t job_index) const {
    if (auto it = fixed.find(id); it != fixed.end()) {
        return it->second;
    }
    if (const auto* m = find_migrating(id)) {
        return m->sequence[job_index % m->sequence.size()];
    }
    throw ModelError(task_label(id) + ": not covered by the plan");
}

std::vector<std::vector<std::size_t>> AssignmentPlan::job_matrix(const TaskSystem& system) const {
    std::vector<std::vector<std::size_t>> a(system.tasks.size(), std::vector<std::size_t>(cpu_count, 0));
    for (std::size_t i = 0; i < system.tasks.size(); ++i) {
        const auto id = system.tasks[i].id;
        if (auto it = fixed.find(id); it != fixed.end()) {
            a[i][it->second] = frame_count;
        } else if (const auto* m = find_migrating(id)) {
            a[i] = m->jobs_per_cpu;
        }
    }
    return a;
}

std::vector<std::vector<MultiframeTask>> AssignmentPlan::per_cpu_multiframes() const {
    std::vector<std::vector<MultiframeTask>> out(cpu_count);
    for (const auto& m : migrating) {
        for (const auto& [cpu, mf] : m.images) {
            out.at(cpu).push_back(mf);
        }
    }
    return out;
}

void AssignmentPlan::check_invariants(const TaskSystem& system) const {
    if (frame_count < 1) {
        throw ModelError("plan: K must be at least 1");
    }
    if (cpu_count != system.cpu_count) {
        throw ModelError("plan: cpu count differs from the task system");
    }
    for (const auto& [id, cpu] : fixed) {
        if (system.find(id) == nullptr) {
            throw ModelError("plan references unknown " + task_label(id));
        }
        if (cpu >= cpu_count) {
            throw ModelError(task_label(id) + ": cpu index out of range");
        }
    }
    for (const auto& m : migrating) {
        const auto label = task_label(m.task);
        const Task* task = system.find(m.task);
        if (task == nullptr) {
            throw ModelError("plan references unknown " + label);
        }
        if (fixed.contains(m.task)) {
            throw ModelError(label + ": both fixed and migrating");
        }
        if (m.jobs_per_cpu.size() != cpu_count) {
            throw ModelError(label + ": job-count row has wrong length");
        }
        std::size_t total = 0;
        for (auto c : m.jobs_per_cpu) {
            total += c;
        }
        if (total != frame_count) {
            throw ModelError(label + ": job counts do not sum to K");
        }
        if (m.sequence.size() != frame_count) {
            throw ModelError(label + ": sequence length differs from K");
        }
        std::vector<std::size_t> owners(frame_count, 0);
        std::vector<std::size_t> per_cpu(cpu_count, 0);
        for (const auto& [cpu, mf] : m.images) {
            if (cpu >= cpu_count) {
                throw ModelError(label + ": cpu index out of range");
            }
            if (mf.frame_count() != frame_count || mf.source != m.task || mf.wcet != task->wcet ||
                mf.deadline != task->deadline || mf.period != task->period) {
                throw ModelError(label + ": multiframe image does not match the task");
            }
            mf.validate();
            for (std::size_t p = 0; p < frame_count; ++p) {
                if (mf.occupies(p)) {
                    ++owners[p];
                    ++per_cpu[cpu];
                    if (m.sequence[p] != cpu) {
                        throw ModelError(label + ": sequence disagrees with frame " + std::to_string(p));
                    }
                }
            }
        }
        for (std::size_t p = 0; p < frame_count; ++p) {
            if (owners[p] != 1) {
                throw ModelError(label + ": frame " + std::to_string(p) + " is not owned by exactly one cpu");
            }
        }
        if (per_cpu != m.jobs_per_cpu) {
            throw ModelError(label + ": job counts disagree with the images");
        }
    }
}

const char* to_string(VerdictStatus status) {
    switch (status) {
        case VerdictStatus::Schedulable:
            return "schedulable";
        case VerdictStatus::NotSchedulable:
            return "not-schedulable";
        case VerdictStatus::HorizonOverflow:
            return "horizon-overflow";
    }
    return "unknown";
}

}  // namespace semipart
