#include <semipart/io.hpp>

#include <fstream>
#include <set>
#include <sstream>

namespace semipart::io {

using nlohmann::json;

namespace {

const std::set<std::string> kSystemFields{"cpus", "K", "tasks", "plan"};
const std::set<std::string> kTaskFields{"id", "C", "D", "T"};

std::int64_t require_integer(const json& obj, const std::string& key, const std::string& where) {
    if (!obj.contains(key)) {
        throw InputError(where + ": missing field '" + key + "'");
    }
    const auto& v = obj.at(key);
    if (!v.is_number_integer()) {
        throw InputError(where + ": field '" + key + "' must be an integer");
    }
    return v.get<std::int64_t>();
}

std::string rational_text(const Rational& r) {
    std::ostringstream s;
    s << numerator(r);
    if (denominator(r) != 1) {
        s << '/' << denominator(r);
    }
    return s.str();
}

std::string frames_text(const MultiframeTask& mf) {
    std::ostringstream s;
    s << '(';
    for (std::size_t p = 0; p < mf.frames.size(); ++p) {
        s << (p ? "," : "") << mf.frames[p];
    }
    s << ')';
    return s.str();
}

}  // namespace

SystemDocument parse_system(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw InputError(std::string("not a valid JSON document: ") + e.what());
    }
    if (!doc.is_object()) {
        throw InputError("task-system document must be an object");
    }
    SystemDocument out;
    for (const auto& [key, value] : doc.items()) {
        if (!kSystemFields.contains(key)) {
            out.warnings.push_back("ignoring unknown field '" + key + "'");
        }
    }
    const auto cpus = require_integer(doc, "cpus", "document");
    const auto frames = require_integer(doc, "K", "document");
    if (frames < 1) {
        throw InputError("document: K must be at least 1");
    }
    if (!doc.contains("tasks")) {
        throw InputError("document: missing field 'tasks'");
    }
    if (!doc.at("tasks").is_array()) {
        throw InputError("document: field 'tasks' must be an array");
    }
    std::vector<RawTask> raw;
    std::size_t index = 0;
    for (const auto& t : doc.at("tasks")) {
        const auto where = "tasks[" + std::to_string(index++) + "]";
        if (!t.is_object()) {
            throw InputError(where + ": must be an object");
        }
        for (const auto& [key, value] : t.items()) {
            if (!kTaskFields.contains(key)) {
                out.warnings.push_back(where + ": ignoring unknown field '" + key + "'");
            }
        }
        raw.push_back(RawTask{require_integer(t, "id", where), require_integer(t, "C", where),
                              require_integer(t, "D", where), require_integer(t, "T", where)});
    }
    try {
        out.system = validate_system(raw, cpus);
    } catch (const ModelError& e) {
        throw InputError(e.what());
    }
    out.frames = static_cast<std::size_t>(frames);
    if (doc.contains("plan")) {
        out.plan = doc.at("plan");
    }
    return out;
}

SystemDocument read_system_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw InputError("cannot read '" + path.string() + "'");
    }
    std::stringstream buffer;
    buffer << in.rdbuf();
    return parse_system(buffer.str());
}

json system_to_json(const TaskSystem& system, std::size_t frames) {
    json tasks = json::array();
    for (const auto& t : system.tasks) {
        tasks.push_back({{"id", t.id}, {"C", t.wcet}, {"D", t.deadline}, {"T", t.period}});
    }
    return {{"cpus", system.cpu_count}, {"K", frames}, {"tasks", std::move(tasks)}};
}

json plan_to_json(const AssignmentPlan& plan) {
    json fixed = json::array();
    for (const auto& [id, cpu] : plan.fixed) {
        fixed.push_back({{"id", id}, {"cpu", cpu}});
    }
    json migrating = json::array();
    for (const auto& m : plan.migrating) {
        json images = json::array();
        for (const auto& [cpu, mf] : m.images) {
            images.push_back({{"cpu", cpu}, {"frames", mf.frames}});
        }
        migrating.push_back(
            {{"id", m.task}, {"jobs_per_cpu", m.jobs_per_cpu}, {"sequence", m.sequence}, {"images", images}});
    }
    return {{"K", plan.frame_count}, {"fixed", std::move(fixed)}, {"migrating", std::move(migrating)}};
}

AssignmentPlan parse_plan(const json& doc, const TaskSystem& system) {
    if (!doc.is_object()) {
        throw InputError("plan must be an object");
    }
    AssignmentPlan plan;
    plan.cpu_count = system.cpu_count;
    try {
        const auto frames = require_integer(doc, "K", "plan");
        if (frames < 1) {
            throw InputError("plan: K must be at least 1");
        }
        plan.frame_count = static_cast<std::size_t>(frames);
        if (!doc.contains("fixed") || !doc.at("fixed").is_array()) {
            throw InputError("plan: missing array 'fixed'");
        }
        if (!doc.contains("migrating") || !doc.at("migrating").is_array()) {
            throw InputError("plan: missing array 'migrating'");
        }
        auto cpu_of = [&](std::int64_t v, const std::string& where) {
            if (v < 0 || static_cast<std::size_t>(v) >= system.cpu_count) {
                throw InputError(where + ": cpu index out of range");
            }
            return static_cast<CpuIndex>(v);
        };
        for (const auto& f : doc.at("fixed")) {
            const auto id = require_integer(f, "id", "plan.fixed");
            if (!plan.fixed.emplace(id, cpu_of(require_integer(f, "cpu", "plan.fixed"), "plan.fixed")).second) {
                throw InputError("plan.fixed: task " + std::to_string(id) + " listed twice");
            }
        }
        for (const auto& m : doc.at("migrating")) {
            const auto id = require_integer(m, "id", "plan.migrating");
            const auto where = "plan.migrating[task " + std::to_string(id) + "]";
            const Task* task = system.find(id);
            if (task == nullptr) {
                throw InputError(where + ": unknown task");
            }
            if (!m.contains("sequence") || !m.at("sequence").is_array()) {
                throw InputError(where + ": missing array 'sequence'");
            }
            MigratingAssignment a;
            a.task = id;
            for (const auto& c : m.at("sequence")) {
                if (!c.is_number_integer()) {
                    throw InputError(where + ": sequence entries must be integers");
                }
                a.sequence.push_back(cpu_of(c.get<std::int64_t>(), where));
            }
            if (a.sequence.size() != plan.frame_count) {
                throw InputError(where + ": sequence length differs from K");
            }
            a.jobs_per_cpu.assign(system.cpu_count, 0);
            for (auto c : a.sequence) {
                ++a.jobs_per_cpu[c];
            }
            for (CpuIndex cpu = 0; cpu < system.cpu_count; ++cpu) {
                if (a.jobs_per_cpu[cpu] == 0) {
                    continue;
                }
                std::vector<std::uint8_t> bits(plan.frame_count);
                for (std::size_t p = 0; p < plan.frame_count; ++p) {
                    bits[p] = a.sequence[p] == cpu ? 1 : 0;
                }
                a.images.emplace_back(cpu, MultiframeTask::from_bits(*task, bits));
            }
            // optional redundant fields must agree with the sequence
            if (m.contains("jobs_per_cpu") && m.at("jobs_per_cpu") != json(a.jobs_per_cpu)) {
                throw InputError(where + ": jobs_per_cpu disagrees with the sequence");
            }
            if (m.contains("images")) {
                json expected = json::array();
                for (const auto& [cpu, mf] : a.images) {
                    expected.push_back({{"cpu", cpu}, {"frames", mf.frames}});
                }
                if (m.at("images") != expected) {
                    throw InputError(where + ": images disagree with the sequence");
                }
            }
            plan.migrating.push_back(std::move(a));
        }
        plan.check_invariants(system);
    } catch (const ModelError& e) {
        throw InputError(std::string("plan: ") + e.what());
    } catch (const json::exception& e) {
        throw InputError(std::string("plan: ") + e.what());
    }
    for (const auto& t : system.tasks) {
        if (!plan.covers(t.id)) {
            throw InputError("plan: task " + std::to_string(t.id) + " is not placed");
        }
    }
    return plan;
}

void write_json_file(const std::filesystem::path& path, const json& doc) {
    std::ofstream out(path);
    if (!out) {
        throw InputError("cannot write '" + path.string() + "'");
    }
    out << doc.dump(2) << '\n';
    if (!out) {
        throw InputError("cannot write '" + path.string() + "'");
    }
}

json verdict_to_json(const Verdict& verdict) {
    json cpus = json::array();
    for (const auto& v : verdict.per_cpu) {
        json entry{{"cpu", v.cpu},
                   {"status", to_string(v.status)},
                   {"density", rational_text(v.density)},
                   {"hyperperiod", v.hyperperiod},
                   {"horizon", v.horizon},
                   {"truncated", v.truncated}};
        if (v.violation_time) {
            entry["violation_time"] = *v.violation_time;
            entry["demand_at_violation"] = v.demand_at_violation;
        } else {
            entry["violation_time"] = nullptr;
        }
        cpus.push_back(std::move(entry));
    }
    return {{"status", to_string(verdict.status)}, {"cpus", std::move(cpus)}};
}

json analysis_to_json(const TaskSystem& system, const PartitionResult& result, TestMode mode) {
    json out{{"mode", to_string(mode)},
             {"K", result.plan.frame_count},
             {"verdict", verdict_to_json(result.verdict)},
             {"plan", plan_to_json(result.plan)},
             {"job_matrix", result.plan.job_matrix(system)},
             {"probes", result.probes}};
    out["failed_task"] = result.failed_task ? json(*result.failed_task) : json(nullptr);
    return out;
}

json sim_report_to_json(const SimReport& report, Ticks horizon) {
    json misses = json::array();
    for (const auto& m : report.misses) {
        misses.push_back({{"task", m.task},
                          {"job", m.job},
                          {"cpu", m.cpu},
                          {"deadline", m.deadline},
                          {"completion", m.completion ? json(*m.completion) : json(nullptr)}});
    }
    return {{"horizon", horizon},
            {"jobs", report.jobs_released},
            {"migrations", report.migrations},
            {"preemptions", report.preemptions},
            {"misses", std::move(misses)}};
}

std::string format_sequence(const std::vector<CpuIndex>& sequence) {
    std::ostringstream s;
    s << '(';
    for (std::size_t i = 0; i < sequence.size(); ++i) {
        s << (i ? ", " : "") << "cpu" << sequence[i];
    }
    s << ')';
    return s.str();
}

void print_analysis(std::ostream& out, const TaskSystem& system, const PartitionResult& result, TestMode mode) {
    const auto& plan = result.plan;
    out << "tasks: " << system.tasks.size() << "  cpus: " << system.cpu_count << "  K: " << plan.frame_count
        << "  test: " << to_string(mode) << '\n';
    out << "verdict: " << to_string(result.verdict.status);
    if (result.failed_task) {
        out << " (task " << *result.failed_task << " could not be placed)";
    }
    out << '\n';

    out << "placement:\n";
    for (const auto& t : system.tasks) {
        out << "  task " << t.id << ": ";
        if (auto it = plan.fixed.find(t.id); it != plan.fixed.end()) {
            out << "cpu" << it->second << '\n';
        } else if (const auto* m = plan.find_migrating(t.id)) {
            out << "migrating, sequence " << format_sequence(m->sequence) << '\n';
            for (const auto& [cpu, mf] : m->images) {
                out << "    cpu" << cpu << " frames " << frames_text(mf) << '\n';
            }
        } else {
            out << "unplaced\n";
        }
    }

    out << "job matrix A:\n";
    const auto a = plan.job_matrix(system);
    for (std::size_t i = 0; i < system.tasks.size(); ++i) {
        out << "  task " << system.tasks[i].id << ":";
        for (auto c : a[i]) {
            out << ' ' << c;
        }
        out << '\n';
    }

    out << "cpus:\n";
    for (const auto& v : result.verdict.per_cpu) {
        out << "  cpu" << v.cpu << ": " << to_string(v.status) << "  density " << rational_text(v.density)
            << "  horizon " << v.horizon << "  hyperperiod " << v.hyperperiod
            << (v.truncated ? "  truncated" : "");
        if (v.violation_time) {
            out << "  first violation at t=" << *v.violation_time << " (demand " << v.demand_at_violation << ")";
        }
        out << '\n';
    }
}

void print_sim_report(std::ostream& out, const SimReport& report, Ticks horizon) {
    out << "horizon: " << horizon << "  jobs: " << report.jobs_released << "  migrations: " << report.migrations
        << "  preemptions: " << report.preemptions << '\n';
    if (report.misses.empty()) {
        out << "no deadline misses\n";
        return;
    }
    out << "deadline misses: " << report.misses.size() << '\n';
    out << "first miss at t=" << report.misses.front().deadline << '\n';
    for (const auto& m : report.misses) {
        out << "  task " << m.task << " job " << m.job << " cpu" << m.cpu << " deadline " << m.deadline;
        if (m.completion) {
            out << " completed " << *m.completion << '\n';
        } else {
            out << " unfinished\n";
        }
    }
}

}  // namespace semipart::io
