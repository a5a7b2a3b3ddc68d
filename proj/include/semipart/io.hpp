#pragma once

#include <semipart/assign.hpp>
#include <semipart/model.hpp>
#include <semipart/sim.hpp>

#include <json.hpp>

#include <filesystem>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

namespace semipart::io {

/// Malformed or inconsistent input document.
class InputError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A task-system document: `cpus`, `K` and `tasks` ({id, C, D, T}), plus an
/// optional `plan` object written by `analyze`.
struct SystemDocument {
    TaskSystem system;
    std::size_t frames{1};
    /// Unknown fields that were ignored.
    std::vector<std::string> warnings;
    /// Raw `plan` object, null when absent.
    nlohmann::json plan;
};

SystemDocument parse_system(const std::string& text);
SystemDocument read_system_file(const std::filesystem::path& path);

nlohmann::json system_to_json(const TaskSystem& system, std::size_t frames);

/// Plan object as embedded under `plan` in a task-system document.
nlohmann::json plan_to_json(const AssignmentPlan& plan);

/// Rebuilds a plan from its `plan` object and checks it against the system.
/// Throws InputError on any inconsistency.
AssignmentPlan parse_plan(const nlohmann::json& plan, const TaskSystem& system);

/// Writes `doc` with a trailing newline; throws InputError when the path
/// cannot be written.
void write_json_file(const std::filesystem::path& path, const nlohmann::json& doc);

nlohmann::json verdict_to_json(const Verdict& verdict);
nlohmann::json analysis_to_json(const TaskSystem& system, const PartitionResult& result, TestMode mode);
nlohmann::json sim_report_to_json(const SimReport& report, Ticks horizon);

void print_analysis(std::ostream& out, const TaskSystem& system, const PartitionResult& result, TestMode mode);
void print_sim_report(std::ostream& out, const SimReport& report, Ticks horizon);

/// `(cpu0, cpu1, ...)`
std::string format_sequence(const std::vector<CpuIndex>& sequence);

}  // namespace semipart::io
