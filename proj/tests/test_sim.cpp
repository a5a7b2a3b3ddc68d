#include <semipart/assign.hpp>
#include <semipart/sim.hpp>

#include "oracles.hpp"

#include <gtest/gtest.h>

#include <map>
#include <random>
#include <sstream>

using namespace semipart;

namespace {

AssignmentPlan all_on(const TaskSystem& s, CpuIndex cpu) {
    AssignmentPlan plan;
    plan.cpu_count = s.cpu_count;
    for (const auto& t : s.tasks) {
        plan.fixed[t.id] = cpu;
    }
    return plan;
}

struct TickJob {
    TaskId task;
    std::uint64_t index;
    Ticks deadline;
    Ticks remaining;
};

// Unit-step uniprocessor EDF with the same tie-break; returns the
// completion time of every job, keyed by (task, index).
std::map<std::pair<TaskId, std::uint64_t>, Ticks> tick_edf(const TaskSystem& s, Ticks horizon) {
    std::vector<TickJob> pending;
    std::map<std::pair<TaskId, std::uint64_t>, Ticks> done;
    for (Ticks now = 0; now < horizon; ++now) {
        for (const auto& t : s.tasks) {
            if (now % t.period == 0) {
                pending.push_back({t.id, static_cast<std::uint64_t>(now / t.period), now + t.deadline, t.wcet});
            }
        }
        if (pending.empty()) {
            continue;
        }
        auto it = std::min_element(pending.begin(), pending.end(), [](const TickJob& a, const TickJob& b) {
            return std::tie(a.deadline, a.task, a.index) < std::tie(b.deadline, b.task, b.index);
        });
        if (--it->remaining == 0) {
            done[{it->task, it->index}] = now + 1;
            pending.erase(it);
        }
    }
    return done;
}

}  // namespace

TEST(Simulation, LightSystemHasNoMisses) {
    const TaskSystem s{{{1, 2, 5, 5}, {2, 2, 10, 10}}, 1};
    const auto r = run_simulation({s, all_on(s, 0), 20});
    EXPECT_TRUE(r.miss_free());
    EXPECT_EQ(r.jobs_released, 6u);
    EXPECT_EQ(r.migrations, 0u);
}

TEST(Simulation, OverloadMissesAtFirstDeadline) {
    const TaskSystem s{{{1, 3, 5, 5}, {2, 3, 5, 5}}, 1};
    const auto r = run_simulation({s, all_on(s, 0), 10});
    ASSERT_FALSE(r.miss_free());
    const auto& first = r.misses.front();
    EXPECT_EQ(first.task, 2);
    EXPECT_EQ(first.job, 0u);
    EXPECT_EQ(first.deadline, 5);
    EXPECT_EQ(first.completion, Ticks{6});
}

TEST(Simulation, CountsMigrationsAlongSequence) {
    const Task task{1, 2, 10, 10};
    const TaskSystem s{{task}, 2};
    AssignmentPlan plan;
    plan.frame_count = 3;
    plan.cpu_count = 2;
    const std::vector<std::size_t> counts{2, 1};
    plan.migrating.push_back(most_regular_assign(task, 3, counts));
    ASSERT_EQ(plan.migrating.front().sequence, (std::vector<CpuIndex>{0, 1, 0}));

    SimConfig config{s, plan, 60};
    config.record_trace = true;
    const auto r = run_simulation(config);
    EXPECT_EQ(r.jobs_released, 6u);
    EXPECT_EQ(r.migrations, 4u);
    EXPECT_TRUE(r.miss_free());
    std::vector<CpuIndex> starts;
    for (const auto& e : r.trace) {
        if (e.kind == TraceKind::Start) {
            starts.push_back(e.cpu);
        }
    }
    EXPECT_EQ(starts, (std::vector<CpuIndex>{0, 1, 0, 0, 1, 0}));
}

TEST(Simulation, CompletionBeforeReleaseAtSameInstant) {
    const TaskSystem s{{{1, 5, 5, 5}}, 1};
    SimConfig config{s, all_on(s, 0), 15};
    config.record_trace = true;
    const auto r = run_simulation(config);
    EXPECT_TRUE(r.miss_free());
    EXPECT_EQ(r.preemptions, 0u);
    std::ostringstream out;
    write_trace(out, r.trace);
    EXPECT_NE(out.str().find("5 complete 1 0 0\n5 release 1 1 0\n5 start 1 1 0\n"), std::string::npos);
}

TEST(Simulation, PreemptsForEarlierDeadline) {
    const TaskSystem s{{{1, 1, 2, 4}, {2, 4, 8, 8}}, 1};
    SimConfig config{s, all_on(s, 0), 8};
    config.record_trace = true;
    const auto r = run_simulation(config);
    EXPECT_TRUE(r.miss_free());
    EXPECT_EQ(r.preemptions, 1u);
}

TEST(Simulation, MatchesTickLevelEdf) {
    std::mt19937_64 rng(31);
    for (int i = 0; i < 200; ++i) {
        TaskSystem s{{}, 1};
        const int n = 1 + static_cast<int>(rng() % 4);
        for (int k = 0; k < n; ++k) {
            s.tasks.push_back(oracle::random_task(rng, 15, k + 1));
        }
        const Ticks horizon = 120;
        const auto r = run_simulation({s, all_on(s, 0), horizon});
        const auto expected = tick_edf(s, horizon);

        std::vector<std::pair<TaskId, std::uint64_t>> expected_misses;
        for (const auto& t : s.tasks) {
            for (Ticks rel = 0; rel + t.deadline <= horizon; rel += t.period) {
                const std::pair<TaskId, std::uint64_t> key{t.id, static_cast<std::uint64_t>(rel / t.period)};
                auto it = expected.find(key);
                if (it == expected.end() || it->second > rel + t.deadline) {
                    expected_misses.push_back(key);
                }
            }
        }
        std::vector<std::pair<TaskId, std::uint64_t>> got;
        for (const auto& m : r.misses) {
            got.push_back({m.task, m.job});
            if (m.completion) {
                ASSERT_EQ(*m.completion, expected.at({m.task, m.job}));
            }
        }
        std::sort(expected_misses.begin(), expected_misses.end());
        std::sort(got.begin(), got.end());
        ASSERT_EQ(got, expected_misses) << "system " << i;
    }
}

TEST(Simulation, TraceRespectsEdfAndWorkConservation) {
    std::mt19937_64 rng(32);
    for (int i = 0; i < 100; ++i) {
        TaskSystem s{{}, 2};
        for (int k = 0; k < 5; ++k) {
            s.tasks.push_back(oracle::random_task(rng, 20, k + 1));
        }
        const auto part = semi_partition(s, 4, TestMode::Pattern);
        if (!part.verdict.schedulable()) {
            continue;
        }
        SimConfig config{s, part.plan, 200};
        config.record_trace = true;
        const auto r = run_simulation(config);
        ASSERT_TRUE(r.miss_free());

        // replay: per CPU, the running job must be the EDF choice among the
        // released and unfinished jobs, and it must exist whenever one is pending
        std::map<std::pair<TaskId, std::uint64_t>, CpuIndex> job_cpu;
        for (const auto& e : r.trace) {
            if (e.kind == TraceKind::Release) {
                job_cpu[{e.task, e.job}] = e.cpu;
            }
            if (e.kind == TraceKind::Start || e.kind == TraceKind::Resume) {
                ASSERT_EQ(job_cpu.at({e.task, e.job}), e.cpu);
            }
        }
        std::map<CpuIndex, std::map<std::pair<TaskId, std::uint64_t>, Ticks>> pending;
        std::map<CpuIndex, std::optional<std::pair<TaskId, std::uint64_t>>> running;
        for (std::size_t e = 0; e < r.trace.size(); ++e) {
            const auto& ev = r.trace[e];
            const std::pair<TaskId, std::uint64_t> key{ev.task, ev.job};
            switch (ev.kind) {
                case TraceKind::Release:
                    pending[ev.cpu][key] = ev.time + s.find(ev.task)->deadline;
                    break;
                case TraceKind::Start:
                case TraceKind::Resume:
                    running[ev.cpu] = key;
                    break;
                case TraceKind::Preempt:
                    running[ev.cpu].reset();
                    break;
                case TraceKind::Complete:
                    pending[ev.cpu].erase(key);
                    running[ev.cpu].reset();
                    break;
                case TraceKind::Miss:
                    break;
            }
            if (ev.time >= 200 || (e + 1 < r.trace.size() && r.trace[e + 1].time == ev.time)) {
                continue;
            }
            for (const auto& [cpu, jobs] : pending) {
                if (jobs.empty()) {
                    ASSERT_FALSE(running[cpu].has_value());
                    continue;
                }
                ASSERT_TRUE(running[cpu].has_value()) << "idle with pending work at " << ev.time;
                const auto best = std::min_element(jobs.begin(), jobs.end(), [](const auto& a, const auto& b) {
                    return std::tie(a.second, a.first) < std::tie(b.second, b.first);
                });
                ASSERT_EQ(best->first, *running[cpu]);
            }
        }
        for (const auto& t : s.tasks) {
            for (std::uint64_t q = 0; q * t.period < 200; ++q) {
                ASSERT_EQ(job_cpu.at({t.id, q}), part.plan.cpu_for_job(t.id, q));
            }
        }
    }
}

TEST(Simulation, SporadicReleasesStayAccepted) {
    std::mt19937_64 rng(33);
    int runs = 0;
    for (int i = 0; i < 60; ++i) {
        TaskSystem s{{}, 2};
        for (int k = 0; k < 5; ++k) {
            s.tasks.push_back(oracle::random_task(rng, 30, k + 1));
        }
        const auto part = semi_partition(s, 3, TestMode::Pattern);
        if (!part.verdict.schedulable()) {
            continue;
        }
        for (std::uint64_t seed = 1; seed <= 5; ++seed) {
            SimConfig config{s, part.plan, 600, SporadicSeeded{seed, 7}};
            ASSERT_TRUE(run_simulation(config).miss_free());
            ++runs;
        }
    }
    EXPECT_GT(runs, 0);
}

TEST(Simulation, SporadicIsSeeded) {
    const TaskSystem s{{{1, 1, 5, 5}, {2, 2, 9, 9}}, 1};
    SimConfig a{s, all_on(s, 0), 200, SporadicSeeded{4, 6}};
    a.record_trace = true;
    auto b = a;
    const auto ra = run_simulation(a);
    const auto rb = run_simulation(b);
    std::ostringstream ta;
    std::ostringstream tb;
    write_trace(ta, ra.trace);
    write_trace(tb, rb.trace);
    EXPECT_EQ(ta.str(), tb.str());
    EXPECT_LT(ra.jobs_released, 40u + 23u);
}

TEST(Simulation, RejectsBadPlans) {
    const TaskSystem s{{{1, 1, 5, 5}, {2, 1, 5, 5}}, 1};
    AssignmentPlan partial;
    partial.cpu_count = 1;
    partial.fixed[1] = 0;
    EXPECT_THROW(run_simulation({s, partial, 10}), ModelError);

    auto unknown_cpu = all_on(s, 0);
    unknown_cpu.fixed[2] = 3;
    EXPECT_THROW(run_simulation({s, unknown_cpu, 10}), ModelError);

    auto unknown_task = all_on(s, 0);
    unknown_task.fixed[9] = 0;
    EXPECT_THROW(run_simulation({s, unknown_task, 10}), ModelError);

    EXPECT_THROW(run_simulation({s, all_on(s, 0), 0}), ModelError);
}
