#include <semipart/assign.hpp>

#include <algorithm>
#include <stdexcept>

namespace semipart {

namespace {

std::size_t ceil_div(std::size_t num, std::size_t den) {
    return (num + den - 1) / den;
}

std::vector<CpuIndex> sequence_from_images(const std::vector<std::pair<CpuIndex, MultiframeTask>>& images,
                                           std::size_t frames) {
    std::vector<CpuIndex> sequence(frames, 0);
    for (const auto& [cpu, mf] : images) {
        for (std::size_t p = 0; p < frames; ++p) {
            if (mf.occupies(p)) {
                sequence[p] = cpu;
            }
        }
    }
    return sequence;
}

MultiframeTask packed_image(const Task& task, std::size_t frames, std::size_t jobs) {
    std::vector<std::uint8_t> bits(frames, 0);
    std::fill_n(bits.begin(), jobs, std::uint8_t{1});
    return MultiframeTask::from_bits(task, bits);
}

Verdict merge_verdicts(std::vector<CpuVerdict> per_cpu) {
    Verdict out;
    out.per_cpu = std::move(per_cpu);
    bool overflow = false;
    for (const auto& v : out.per_cpu) {
        if (v.status == VerdictStatus::NotSchedulable) {
            out.status = VerdictStatus::NotSchedulable;
            return out;
        }
        overflow = overflow || v.status == VerdictStatus::HorizonOverflow;
    }
    out.status = overflow ? VerdictStatus::HorizonOverflow : VerdictStatus::Schedulable;
    return out;
}

}  // namespace

BitPattern regular_pattern(std::size_t frames, std::size_t count) {
    if (frames == 0) {
        throw std::invalid_argument("pattern needs at least one frame");
    }
    if (count > frames) {
        throw std::invalid_argument("job count exceeds frame count");
    }
    BitPattern p;
    p.bits.resize(frames);
    for (std::size_t l = 0; l < frames; ++l) {
        p.bits[l] = static_cast<std::uint8_t>(ceil_div((l + 1) * count, frames) - ceil_div(l * count, frames));
    }
    p.ones = count;
    return p;
}

std::vector<CpuIndex> flatten_sequence(std::span<const BitPattern> per_cpu, std::size_t frames) {
    std::size_t total = 0;
    for (const auto& p : per_cpu) {
        if (p.size() != frames) {
            throw std::invalid_argument("pattern length differs from K");
        }
        total += p.ones;
    }
    if (total != frames) {
        throw std::invalid_argument("patterns must hold exactly K jobs");
    }
    std::vector<CpuIndex> sequence;
    sequence.reserve(frames);
    for (std::size_t l = 0; l < frames; ++l) {
        for (CpuIndex cpu = 0; cpu < per_cpu.size(); ++cpu) {
            if (per_cpu[cpu].bits[l]) {
                sequence.push_back(cpu);
            }
        }
    }
    return sequence;
}

MigratingAssignment most_regular_assign(const Task& task, std::size_t frames,
                                        std::span<const std::size_t> counts) {
    std::vector<BitPattern> patterns;
    patterns.reserve(counts.size());
    for (auto c : counts) {
        patterns.push_back(regular_pattern(frames, c));
    }
    MigratingAssignment out;
    out.task = task.id;
    out.jobs_per_cpu.assign(counts.begin(), counts.end());
    out.sequence = flatten_sequence(patterns, frames);
    for (CpuIndex cpu = 0; cpu < counts.size(); ++cpu) {
        if (counts[cpu] == 0) {
            continue;
        }
        std::vector<std::uint8_t> bits(frames, 0);
        for (std::size_t p = 0; p < frames; ++p) {
            bits[p] = out.sequence[p] == cpu ? 1 : 0;
        }
        out.images.emplace_back(cpu, MultiframeTask::from_bits(task, bits));
    }
    return out;
}

MultiframeTask merge_frames(std::span<const MultiframeTask> prior, const BitPattern& pending,
                            const Task& task, std::size_t frames) {
    std::size_t taken = 0;
    for (const auto& mf : prior) {
        if (mf.frame_count() != frames) {
            throw std::invalid_argument("prior image has a frame count other than K");
        }
        taken += mf.nonzero_count();
    }
    if (taken > frames || pending.size() != frames - taken) {
        throw std::invalid_argument("pending pattern length differs from the free frame count");
    }
    std::vector<std::uint8_t> bits(frames, 0);
    std::size_t q = 0;
    for (std::size_t j = 0; j < frames; ++j) {
        const bool free = std::none_of(prior.begin(), prior.end(),
                                       [j](const MultiframeTask& mf) { return mf.occupies(j); });
        if (free) {
            bits[j] = pending.bits[q++];
        }
    }
    return MultiframeTask::from_bits(task, bits);
}

std::optional<MigratingAssignment> alternative_assign(const Task& task, std::size_t frames,
                                                      std::size_t cpu_count, const CpuProbe& probe) {
    MigratingAssignment out;
    out.task = task.id;
    out.jobs_per_cpu.assign(cpu_count, 0);
    std::vector<MultiframeTask> prior;
    std::size_t remaining = frames;
    for (CpuIndex cpu = 0; cpu < cpu_count && remaining > 0; ++cpu) {
        for (std::size_t jobs = remaining; jobs >= 1; --jobs) {
            auto candidate = merge_frames(prior, regular_pattern(remaining, jobs), task, frames);
            if (probe(candidate, cpu)) {
                out.jobs_per_cpu[cpu] = jobs;
                remaining -= jobs;
                prior.push_back(candidate);
                out.images.emplace_back(cpu, std::move(candidate));
                break;
            }
        }
    }
    if (remaining > 0) {
        return std::nullopt;
    }
    out.sequence = sequence_from_images(out.images, frames);
    return out;
}

std::optional<MigratingAssignment> packed_count_assign(const Task& task, std::size_t frames,
                                                       std::size_t cpu_count, const CpuProbe& probe) {
    std::vector<std::size_t> counts(cpu_count, 0);
    std::size_t remaining = frames;
    for (CpuIndex cpu = 0; cpu < cpu_count && remaining > 0; ++cpu) {
        for (std::size_t jobs = remaining; jobs >= 1; --jobs) {
            if (probe(packed_image(task, frames, jobs), cpu)) {
                counts[cpu] = jobs;
                remaining -= jobs;
                break;
            }
        }
    }
    if (remaining > 0) {
        return std::nullopt;
    }
    return most_regular_assign(task, frames, counts);
}

std::vector<Task> ffd_order(const TaskSystem& system) {
    auto order = system.tasks;
    std::sort(order.begin(), order.end(), [](const Task& a, const Task& b) {
        const auto lhs = static_cast<__int128>(a.wcet) * b.period;
        const auto rhs = static_cast<__int128>(b.wcet) * a.period;
        if (lhs != rhs) {
            return lhs > rhs;
        }
        return a.id < b.id;
    });
    return order;
}

FfdResult ffd_assign(const TaskSystem& system, TestMode mode, Ticks cap) {
    FfdResult out;
    out.plan.frame_count = 1;
    out.plan.cpu_count = system.cpu_count;
    std::vector<CpuWorkload> loads(system.cpu_count);
    for (const auto& task : ffd_order(system)) {
        bool placed = false;
        for (CpuIndex cpu = 0; cpu < system.cpu_count; ++cpu) {
            auto candidate = loads[cpu];
            candidate.fixed_tasks.push_back(task);
            if (schedulability_test(candidate, mode, cap, cpu).schedulable()) {
                loads[cpu] = std::move(candidate);
                out.plan.fixed[task.id] = cpu;
                placed = true;
                break;
            }
        }
        if (!placed) {
            out.leftovers.push_back(task.id);
        }
    }
    return out;
}

PartitionResult semi_partition(const TaskSystem& system, std::size_t frames, TestMode mode, Ticks cap) {
    if (frames < 1) {
        throw std::invalid_argument("K must be at least 1");
    }
    PartitionResult out;
    out.plan.frame_count = frames;
    out.plan.cpu_count = system.cpu_count;
    std::vector<CpuWorkload> loads(system.cpu_count);
    std::vector<std::optional<CpuVerdict>> rejections(system.cpu_count);

    auto accepts = [&](const CpuWorkload& w, CpuIndex cpu) {
        ++out.probes;
        auto v = schedulability_test(w, mode, cap, cpu);
        if (!v.schedulable()) {
            rejections[cpu] = v.per_cpu.front();
        }
        return v.schedulable();
    };

    for (const auto& task : ffd_order(system)) {
        std::fill(rejections.begin(), rejections.end(), std::nullopt);

        bool placed = false;
        for (CpuIndex cpu = 0; cpu < system.cpu_count && !placed; ++cpu) {
            auto candidate = loads[cpu];
            candidate.fixed_tasks.push_back(task);
            if (accepts(candidate, cpu)) {
                loads[cpu] = std::move(candidate);
                out.plan.fixed[task.id] = cpu;
                placed = true;
            }
        }
        if (placed) {
            continue;
        }

        std::optional<MigratingAssignment> split;
        if (frames > 1) {
            CpuProbe probe = [&](const MultiframeTask& mf, CpuIndex cpu) {
                auto candidate = loads[cpu];
                candidate.multiframes.push_back(mf);
                return accepts(candidate, cpu);
            };
            split = mode == TestMode::Pattern ? alternative_assign(task, frames, system.cpu_count, probe)
                                              : packed_count_assign(task, frames, system.cpu_count, probe);
        }
        if (!split) {
            std::vector<CpuVerdict> witnesses;
            for (auto& r : rejections) {
                if (r) {
                    witnesses.push_back(*r);
                }
            }
            out.verdict = merge_verdicts(std::move(witnesses));
            if (out.verdict.status == VerdictStatus::Schedulable) {
                out.verdict.status = VerdictStatus::NotSchedulable;
            }
            out.failed_task = task.id;
            return out;
        }
        if (split->images.size() == 1) {
            // every job landed on one CPU: keep it as a plain task
            const auto cpu = split->images.front().first;
            loads[cpu].fixed_tasks.push_back(task);
            out.plan.fixed[task.id] = cpu;
            continue;
        }
        for (const auto& [cpu, mf] : split->images) {
            loads[cpu].multiframes.push_back(mf);
        }
        out.plan.migrating.push_back(std::move(*split));
    }
    out.verdict = verify_plan(system, out.plan, mode, cap);
    return out;
}

std::vector<CpuWorkload> realize_workloads(const TaskSystem& system, const AssignmentPlan& plan) {
    std::vector<CpuWorkload> loads(plan.cpu_count);
    for (const auto& task : system.tasks) {
        if (auto it = plan.fixed.find(task.id); it != plan.fixed.end()) {
            loads.at(it->second).fixed_tasks.push_back(task);
        }
    }
    for (const auto& m : plan.migrating) {
        for (const auto& [cpu, mf] : m.images) {
            loads.at(cpu).multiframes.push_back(mf);
        }
    }
    return loads;
}

Verdict verify_plan(const TaskSystem& system, const AssignmentPlan& plan, TestMode mode, Ticks cap) {
    const auto loads = realize_workloads(system, plan);
    std::vector<CpuVerdict> per_cpu;
    per_cpu.reserve(loads.size());
    for (CpuIndex cpu = 0; cpu < loads.size(); ++cpu) {
        per_cpu.push_back(schedulability_test(loads[cpu], mode, cap, cpu).per_cpu.front());
    }
    return merge_verdicts(std::move(per_cpu));
}

}  // namespace semipart
