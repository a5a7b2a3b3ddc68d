#include <semipart/demand.hpp>

#include <algorithm>
#include <numeric>
#include <queue>

namespace semipart {

const char* to_string(TestMode mode) {
    return mode == TestMode::Packed ? "packed" : "pattern";
}

Ticks dbf_classic(const Task& task, Ticks time) {
    if (time < task.deadline) {
        return 0;
    }
    return ((time - task.deadline) / task.period + 1) * task.wcet;
}

Rational load(const CpuWorkload& workload, Ticks cap) {
    if (!workload.multiframes.empty()) {
        throw std::invalid_argument("load is defined for non-migrating tasks only");
    }
    const auto points = test_points(workload, cap);
    if (points.truncated) {
        throw HorizonOverflowError("hyperperiod exceeds the horizon cap");
    }
    Rational best = 0;
    for (auto t : points.points) {
        Ticks demand = 0;
        for (const auto& task : workload.fixed_tasks) {
            demand += dbf_classic(task, t);
        }
        best = std::max(best, Rational(demand, t));
    }
    return best;
}

std::int64_t super_period_count(Ticks time, std::int64_t frames, Ticks period) {
    return time / (frames * period);
}

std::int64_t residual_job_count(Ticks time, std::int64_t frames, Ticks period, Ticks deadline) {
    const auto residual = time % (frames * period);
    return std::max<std::int64_t>(0, floor_div(residual - deadline, period) + 1);
}

std::int64_t pattern_window_length(Ticks time, std::int64_t frames, Ticks period, Ticks deadline) {
    return residual_job_count(time, frames, period, deadline);
}

Ticks dbf_packed(const MultiframeTask& mf, Ticks time) {
    const auto k = static_cast<std::int64_t>(mf.frame_count());
    const auto ones = static_cast<std::int64_t>(mf.nonzero_count());
    const auto s = super_period_count(time, k, mf.period);
    const auto a = residual_job_count(time, k, mf.period, mf.deadline);
    return s * ones * mf.wcet + std::min(ones, a) * mf.wcet;
}

Ticks dbf_pattern(const MultiframeTask& mf, Ticks time) {
    const auto k = static_cast<std::int64_t>(mf.frame_count());
    const auto ones = static_cast<std::int64_t>(mf.nonzero_count());
    const auto s = super_period_count(time, k, mf.period);
    const auto nb = pattern_window_length(time, k, mf.period, mf.deadline);
    Ticks best = 0;
    for (std::int64_t c = 0; c < k; ++c) {
        Ticks sum = 0;
        for (std::int64_t j = c; j < c + nb; ++j) {
            sum += mf.frames[static_cast<std::size_t>(j % k)];
        }
        best = std::max(best, sum);
    }
    return s * ones * mf.wcet + best;
}

std::vector<Ticks> max_window_sums(std::span<const Ticks> frames) {
    const auto k = frames.size();
    // prefix over two laps of the ring
    std::vector<Ticks> prefix(2 * k + 1, 0);
    for (std::size_t j = 0; j < 2 * k; ++j) {
        prefix[j + 1] = prefix[j] + frames[j % k];
    }
    std::vector<Ticks> best(k + 1, 0);
    for (std::size_t n = 1; n <= k; ++n) {
        for (std::size_t c = 0; c < k; ++c) {
            best[n] = std::max(best[n], prefix[c + n] - prefix[c]);
        }
    }
    return best;
}

Rational density(const CpuWorkload& workload) {
    Rational sum = 0;
    for (const auto& t : workload.fixed_tasks) {
        sum += utilization(t);
    }
    for (const auto& mf : workload.multiframes) {
        const auto ones = static_cast<std::int64_t>(mf.nonzero_count());
        const auto k = static_cast<std::int64_t>(mf.frame_count());
        sum += Rational(ones * mf.wcet, k * mf.period);
    }
    return sum;
}

namespace {

// Calls fn(period) for the recurrence period of every member.
template <typename Fn>
void for_each_recurrence(const CpuWorkload& workload, Fn&& fn) {
    for (const auto& t : workload.fixed_tasks) {
        fn(t.period);
    }
    for (const auto& mf : workload.multiframes) {
        fn(static_cast<Ticks>(mf.frame_count()) * mf.period);
    }
}

}  // namespace

Ticks hyperperiod(const CpuWorkload& workload, Ticks cap) {
    if (workload.empty()) {
        return 0;
    }
    Ticks l = 1;
    bool saturated = false;
    for_each_recurrence(workload, [&](Ticks p) {
        if (saturated) {
            return;
        }
        const auto step = p / std::gcd(l, p);
        if (l > cap / step) {
            saturated = true;
            return;
        }
        l *= step;
        if (l > cap) {
            saturated = true;
        }
    });
    return saturated ? cap + 1 : l;
}

void for_each_deadline(const CpuWorkload& workload, Ticks horizon,
                       const std::function<bool(Ticks)>& visit) {
    // Every member's deadlines form the lattice D + q*T; multiframe frames
    // share their source task's lattice.
    struct Lattice {
        Ticks next;
        Ticks step;
    };
    auto later = [](const Lattice& a, const Lattice& b) { return a.next > b.next; };
    std::priority_queue<Lattice, std::vector<Lattice>, decltype(later)> heap(later);
    for (const auto& t : workload.fixed_tasks) {
        heap.push({t.deadline, t.period});
    }
    for (const auto& mf : workload.multiframes) {
        heap.push({mf.deadline, mf.period});
    }
    Ticks last = 0;
    while (!heap.empty()) {
        auto top = heap.top();
        if (top.next > horizon) {
            break;
        }
        heap.pop();
        if (top.next != last) {
            last = top.next;
            if (!visit(last)) {
                return;
            }
        }
        top.next += top.step;
        heap.push(top);
    }
}

TestPointSet test_points(const CpuWorkload& workload, Ticks cap) {
    TestPointSet set;
    const auto l = hyperperiod(workload, cap);
    set.truncated = l > cap;
    set.horizon = set.truncated ? cap : l;
    for_each_deadline(workload, set.horizon, [&](Ticks t) {
        set.points.push_back(t);
        return true;
    });
    return set;
}

WorkloadDemand::WorkloadDemand(const CpuWorkload& workload, TestMode mode)
    : fixed_(workload.fixed_tasks) {
    terms_.reserve(workload.multiframes.size());
    for (const auto& mf : workload.multiframes) {
        const auto k = static_cast<std::int64_t>(mf.frame_count());
        const auto ones = static_cast<std::int64_t>(mf.nonzero_count());
        FrameTerm term{mf.deadline, mf.period, k, ones * mf.wcet, {}};
        if (mode == TestMode::Packed) {
            term.best_window.resize(static_cast<std::size_t>(k) + 1);
            for (std::int64_t n = 0; n <= k; ++n) {
                term.best_window[static_cast<std::size_t>(n)] = std::min(n, ones) * mf.wcet;
            }
        } else {
            term.best_window = max_window_sums(mf.frames);
        }
        terms_.push_back(std::move(term));
    }
}

Ticks WorkloadDemand::operator()(Ticks time) const {
    Ticks demand = 0;
    for (const auto& t : fixed_) {
        demand += dbf_classic(t, time);
    }
    for (const auto& term : terms_) {
        const auto super = term.frames * term.period;
        const auto residual = time % super;
        const auto nb = std::max<std::int64_t>(0, floor_div(residual - term.deadline, term.period) + 1);
        demand += (time / super) * term.per_super_period + term.best_window[static_cast<std::size_t>(nb)];
    }
    return demand;
}

std::optional<Ticks> slack_horizon(const CpuWorkload& workload, Ticks cap) {
    const auto rate = density(workload);
    if (rate >= 1) {
        return std::nullopt;
    }
    // demand(t) <= rate * t + offset for every t >= 0
    Rational offset = 0;
    for (const auto& t : workload.fixed_tasks) {
        offset += Rational(t.wcet * (t.period - t.deadline), t.period);
    }
    for (const auto& mf : workload.multiframes) {
        const auto ones = static_cast<std::int64_t>(mf.nonzero_count());
        if (ones == 0) {
            continue;
        }
        const auto k = static_cast<std::int64_t>(mf.frame_count());
        const auto super = k * mf.period;
        offset += Rational(ones * mf.wcet * (super - mf.deadline - (ones - 1) * mf.period), super);
    }
    const Rational bound = offset / (1 - rate);
    using boost::multiprecision::cpp_int;
    const cpp_int whole = numerator(bound) / denominator(bound);
    if (whole > cap) {
        return cap + 1;
    }
    return whole.convert_to<Ticks>();
}

Verdict schedulability_test(const CpuWorkload& workload, TestMode mode, Ticks cap, CpuIndex cpu) {
    CpuVerdict v;
    v.cpu = cpu;
    v.density = density(workload);
    if (v.density > 1) {
        v.status = VerdictStatus::NotSchedulable;
        return Verdict{v.status, {v}};
    }
    v.hyperperiod = hyperperiod(workload, cap);
    Ticks horizon = v.hyperperiod;
    if (auto slack = slack_horizon(workload, cap)) {
        horizon = std::min(horizon, *slack);
    }
    if (horizon > cap) {
        v.truncated = true;
        horizon = cap;
    }
    v.horizon = horizon;

    const WorkloadDemand demand(workload, mode);
    for_each_deadline(workload, horizon, [&](Ticks t) {
        const auto d = demand(t);
        if (d > t) {
            v.violation_time = t;
            v.demand_at_violation = d;
            return false;
        }
        return true;
    });

    if (v.violation_time) {
        v.status = VerdictStatus::NotSchedulable;
    } else if (v.truncated) {
        v.status = VerdictStatus::HorizonOverflow;
    } else {
        v.status = VerdictStatus::Schedulable;
    }
    return Verdict{v.status, {v}};
}

}  // namespace semipart
