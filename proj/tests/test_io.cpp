#include <semipart/io.hpp>

#include <gtest/gtest.h>

#include <sstream>

using namespace semipart;
using nlohmann::json;

namespace {

const char* kDoc = R"({"cpus": 2, "K": 2, "tasks": [
  {"id": 1, "C": 6, "D": 10, "T": 10},
  {"id": 2, "C": 6, "D": 10, "T": 10},
  {"id": 3, "C": 3, "D": 5, "T": 5}]})";

std::string message_of(const std::string& text) {
    try {
        io::parse_system(text);
    } catch (const io::InputError& e) {
        return e.what();
    }
    return "";
}

}  // namespace

TEST(ParseSystem, ReadsDocument) {
    const auto doc = io::parse_system(kDoc);
    EXPECT_EQ(doc.system.cpu_count, 2u);
    EXPECT_EQ(doc.frames, 2u);
    ASSERT_EQ(doc.system.tasks.size(), 3u);
    EXPECT_EQ(doc.system.tasks[2], (Task{3, 3, 5, 5}));
    EXPECT_TRUE(doc.warnings.empty());
    EXPECT_TRUE(doc.plan.is_null());
}

TEST(ParseSystem, WarnsOnUnknownFields) {
    const auto doc = io::parse_system(R"({"cpus": 1, "K": 1, "name": "x",
        "tasks": [{"id": 1, "C": 1, "D": 2, "T": 2, "prio": 3}]})");
    ASSERT_EQ(doc.warnings.size(), 2u);
    EXPECT_NE(doc.warnings[0].find("name"), std::string::npos);
    EXPECT_NE(doc.warnings[1].find("prio"), std::string::npos);
}

TEST(ParseSystem, ReportsErrors) {
    EXPECT_NE(message_of("{").find("JSON"), std::string::npos);
    EXPECT_NE(message_of("[]").find("object"), std::string::npos);
    EXPECT_NE(message_of(R"({"K": 1, "tasks": []})").find("cpus"), std::string::npos);
    EXPECT_NE(message_of(R"({"cpus": 1, "K": 0, "tasks": []})").find("K"), std::string::npos);
    EXPECT_NE(message_of(R"({"cpus": 1, "K": 1, "tasks": [{"id": 1, "C": 1, "T": 2}]})").find("'D'"),
              std::string::npos);
    EXPECT_NE(message_of(R"({"cpus": 1, "K": 1, "tasks": [{"id": 1, "C": 1.5, "D": 2, "T": 2}]})").find("integer"),
              std::string::npos);
    EXPECT_NE(message_of(R"({"cpus": 1, "K": 1, "tasks": [{"id": 4, "C": 3, "D": 2, "T": 2}]})").find("task 4"),
              std::string::npos);
}

TEST(SystemJson, RoundTrips) {
    const auto doc = io::parse_system(kDoc);
    const auto again = io::parse_system(io::system_to_json(doc.system, doc.frames).dump());
    EXPECT_EQ(again.system.tasks, doc.system.tasks);
    EXPECT_EQ(again.frames, doc.frames);
}

TEST(PlanJson, RoundTrips) {
    const auto doc = io::parse_system(kDoc);
    const auto result = semi_partition(doc.system, 2, TestMode::Pattern);
    ASSERT_TRUE(result.verdict.schedulable());
    const auto text = io::plan_to_json(result.plan).dump();
    const auto plan = io::parse_plan(json::parse(text), doc.system);
    EXPECT_EQ(plan.fixed, result.plan.fixed);
    ASSERT_EQ(plan.migrating.size(), 1u);
    EXPECT_EQ(plan.migrating[0].sequence, result.plan.migrating[0].sequence);
    EXPECT_EQ(plan.migrating[0].images, result.plan.migrating[0].images);
    EXPECT_EQ(plan.migrating[0].jobs_per_cpu, result.plan.migrating[0].jobs_per_cpu);
}

TEST(PlanJson, RejectsInconsistentPlans) {
    const auto doc = io::parse_system(kDoc);
    const auto good = io::plan_to_json(semi_partition(doc.system, 2, TestMode::Pattern).plan);

    auto bad_sequence = good;
    bad_sequence["migrating"][0]["sequence"] = {0, 0};
    EXPECT_THROW(io::parse_plan(bad_sequence, doc.system), io::InputError);

    auto bad_length = good;
    bad_length["migrating"][0]["sequence"] = {0, 1, 0};
    EXPECT_THROW(io::parse_plan(bad_length, doc.system), io::InputError);

    auto missing_task = good;
    missing_task["fixed"].erase(0);
    EXPECT_THROW(io::parse_plan(missing_task, doc.system), io::InputError);

    auto unknown_cpu = good;
    unknown_cpu["fixed"][0]["cpu"] = 5;
    EXPECT_THROW(io::parse_plan(unknown_cpu, doc.system), io::InputError);

    auto bad_images = good;
    bad_images["migrating"][0]["images"][0]["frames"] = {3, 3};
    EXPECT_THROW(io::parse_plan(bad_images, doc.system), io::InputError);

    EXPECT_THROW(io::parse_plan(json::array(), doc.system), io::InputError);
}

TEST(Printing, SequenceAndAnalysis) {
    EXPECT_EQ(io::format_sequence({0, 1, 2}), "(cpu0, cpu1, cpu2)");
    const auto doc = io::parse_system(kDoc);
    const auto result = semi_partition(doc.system, 2, TestMode::Pattern);
    std::ostringstream out;
    io::print_analysis(out, doc.system, result, TestMode::Pattern);
    EXPECT_NE(out.str().find("verdict: schedulable"), std::string::npos) << out.str();
    EXPECT_NE(out.str().find("migrating, sequence (cpu0, cpu1)"), std::string::npos);
    EXPECT_NE(out.str().find("task 3: 1 1"), std::string::npos);

    const auto j = io::analysis_to_json(doc.system, result, TestMode::Pattern);
    EXPECT_EQ(j["job_matrix"][2], json({1, 1}));
    EXPECT_TRUE(j["failed_task"].is_null());
}
