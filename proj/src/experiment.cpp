#include <semipart/experiment.hpp>

#include <semipart/assign.hpp>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <iomanip>
#include <limits>
#include <stdexcept>
#include <thread>

namespace semipart {

double Rng::unit() {
    // 53 random bits mapped to (0, 1]
    return static_cast<double>((engine_() >> 11) + 1) * 0x1.0p-53;
}

std::int64_t Rng::between(std::int64_t lo, std::int64_t hi) {
    const auto span = static_cast<std::uint64_t>(hi - lo) + 1;
    const auto limit = std::numeric_limits<std::uint64_t>::max() - std::numeric_limits<std::uint64_t>::max() % span;
    std::uint64_t x;
    do {
        x = engine_();
    } while (x >= limit);
    return lo + static_cast<std::int64_t>(x % span);
}

namespace {

std::vector<double> sequential_utilizations(double target, Rng& rng) {
    std::vector<double> out;
    double sum = 0.0;
    while (target - sum > 1e-12) {
        double u = rng.unit();
        if (sum + u > target) {
            u = target - sum;
        }
        out.push_back(u);
        sum += u;
    }
    return out;
}

std::vector<double> simplex_utilizations(double target, Rng& rng) {
    const auto n = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(2.0 * target)));
    for (int attempt = 0; attempt < 10000; ++attempt) {
        std::vector<double> out;
        out.reserve(n);
        double rest = target;
        for (std::size_t i = 1; i < n; ++i) {
            const double next = rest * std::pow(rng.unit(), 1.0 / static_cast<double>(n - i));
            out.push_back(rest - next);
            rest = next;
        }
        out.push_back(rest);
        if (std::all_of(out.begin(), out.end(), [](double u) { return u <= 1.0; })) {
            return out;
        }
    }
    throw std::runtime_error("simplex sampler failed to draw utilizations within (0, 1]");
}

std::uint64_t mix(std::uint64_t x) {
    // splitmix64 finalizer
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

struct Column {
    SweepMode mode;
    std::size_t frames;
};

}  // namespace

TaskSystem generate_task_system(std::size_t cpu_count, double util_fraction, Rng& rng,
                                UtilizationSampler sampler) {
    TaskSystem system;
    system.cpu_count = cpu_count;
    const double target = static_cast<double>(cpu_count) * util_fraction;
    if (target <= 0.0) {
        return system;
    }
    const auto utils = sampler == UtilizationSampler::Simplex ? simplex_utilizations(target, rng)
                                                              : sequential_utilizations(target, rng);
    TaskId id = 1;
    for (double u : utils) {
        const Ticks period = rng.between(kMinPeriod, kMaxPeriod);
        const Ticks wcet = std::max<Ticks>(1, std::llround(u * static_cast<double>(period)));
        system.tasks.push_back(Task{id++, wcet, period, period});
    }
    return system;
}

const char* to_string(SweepMode mode) {
    switch (mode) {
        case SweepMode::Ffd:
            return "ffd";
        case SweepMode::Packed:
            return "packed";
        case SweepMode::Pattern:
            return "pattern";
    }
    return "unknown";
}

SweepMode parse_sweep_mode(const std::string& name) {
    if (name == "ffd") {
        return SweepMode::Ffd;
    }
    if (name == "packed") {
        return SweepMode::Packed;
    }
    if (name == "pattern") {
        return SweepMode::Pattern;
    }
    throw std::invalid_argument("unknown mode '" + name + "' (expected ffd, packed or pattern)");
}

void SweepConfig::validate() const {
    if (cpu_counts.empty() || util_percents.empty() || modes.empty()) {
        throw std::invalid_argument("sweep needs at least one cpu count, fraction and mode");
    }
    if (trials < 1) {
        throw std::invalid_argument("trials must be at least 1");
    }
    for (auto p : util_percents) {
        if (p < 50 || p > 95) {
            throw std::invalid_argument("fractions must lie in [0.50, 0.95]");
        }
    }
    for (auto m : cpu_counts) {
        if (m < 1) {
            throw std::invalid_argument("cpu counts must be positive");
        }
    }
    const bool splits = std::any_of(modes.begin(), modes.end(), [](SweepMode m) { return m != SweepMode::Ffd; });
    if (splits && k_values.empty()) {
        throw std::invalid_argument("packed and pattern modes need at least one K");
    }
    for (auto k : k_values) {
        if (k < 1) {
            throw std::invalid_argument("K values must be positive");
        }
    }
}

std::uint64_t trial_seed(std::uint64_t master, std::size_t cpus, int util_percent, std::size_t trial) {
    auto h = mix(master);
    h = mix(h ^ static_cast<std::uint64_t>(cpus));
    h = mix(h ^ static_cast<std::uint64_t>(util_percent));
    return mix(h ^ static_cast<std::uint64_t>(trial));
}

std::vector<SweepRow> run_sweep(const SweepConfig& config) {
    config.validate();

    std::vector<Column> columns;
    for (auto mode : config.modes) {
        if (mode == SweepMode::Ffd) {
            columns.push_back({mode, 1});
        }
    }
    for (auto k : config.k_values) {
        for (auto mode : config.modes) {
            if (mode != SweepMode::Ffd) {
                columns.push_back({mode, k});
            }
        }
    }

    struct Cell {
        std::size_t cpus;
        int percent;
    };
    std::vector<Cell> cells;
    for (auto m : config.cpu_counts) {
        for (auto p : config.util_percents) {
            cells.push_back({m, p});
        }
    }

    // outcome[cell][trial][column]
    const auto trials = config.trials;
    std::vector<VerdictStatus> outcome(cells.size() * trials * columns.size());
    std::atomic<std::size_t> cursor{0};
    const auto jobs = cells.size() * trials;

    auto worker = [&] {
        for (auto job = cursor.fetch_add(1); job < jobs; job = cursor.fetch_add(1)) {
            const auto& cell = cells[job / trials];
            const auto trial = job % trials;
            Rng rng(trial_seed(config.seed, cell.cpus, cell.percent, trial));
            const auto system = generate_task_system(cell.cpus, cell.percent / 100.0, rng, config.sampler);
            for (std::size_t c = 0; c < columns.size(); ++c) {
                const auto mode = columns[c].mode == SweepMode::Packed ? TestMode::Packed : TestMode::Pattern;
                const auto result = semi_partition(system, columns[c].frames, mode, config.horizon_cap);
                outcome[job * columns.size() + c] = result.verdict.status;
            }
        }
    };

    unsigned workers = config.workers != 0 ? config.workers : std::max(1u, std::thread::hardware_concurrency());
    workers = static_cast<unsigned>(std::min<std::size_t>(workers, jobs));
    if (workers <= 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        pool.reserve(workers);
        for (unsigned w = 0; w < workers; ++w) {
            pool.emplace_back(worker);
        }
    }

    std::vector<SweepRow> rows;
    for (std::size_t cell = 0; cell < cells.size(); ++cell) {
        for (std::size_t c = 0; c < columns.size(); ++c) {
            SweepRow row{cells[cell].cpus, cells[cell].percent, columns[c].frames, columns[c].mode, trials, 0, 0};
            for (std::size_t t = 0; t < trials; ++t) {
                const auto status = outcome[(cell * trials + t) * columns.size() + c];
                row.successes += status == VerdictStatus::Schedulable ? 1 : 0;
                row.overflows += status == VerdictStatus::HorizonOverflow ? 1 : 0;
            }
            rows.push_back(row);
        }
    }
    return rows;
}

void write_sweep_csv(std::ostream& out, const std::vector<SweepRow>& rows) {
    out << "m,fraction,K,mode,trials,successes,overflows,ratio\n";
    const auto flags = out.flags();
    for (const auto& r : rows) {
        out << r.cpus << ',' << r.util_percent / 100 << '.' << std::setw(2) << std::setfill('0')
            << r.util_percent % 100 << std::setfill(' ') << ',' << r.frames << ',' << to_string(r.mode) << ','
            << r.trials << ',' << r.successes << ',' << r.overflows << ',' << std::fixed << std::setprecision(4)
            << r.ratio() << '\n';
        out.flags(flags);
    }
}

}  // namespace semipart
