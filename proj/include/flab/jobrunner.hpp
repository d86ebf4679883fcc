#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "flab/serialize.hpp"

namespace flab {

constexpr int exit_pass = 0;
constexpr int exit_error = 1; // errors and failing verdicts
constexpr int exit_refused = 2;
constexpr int exit_schema = 3;

struct FieldSpec {
    std::string name;
    std::string type;
    bool required;
    std::string help;
};

struct TaskSpec {
    std::string name;
    std::string summary;
    std::vector<FieldSpec> fields; // besides "task" and "seed"
    json example;
};

/// The static task catalog.
const std::vector<TaskSpec> &list_tasks();
json task_catalog();

struct JobContext {
    std::uint64_t seed = 0;
    int precision_bits = 128;
};

struct TaskOutput {
    json result = json::object();
    std::vector<Verdict> verdicts;
    std::vector<std::pair<std::string, std::string>> files; // name, contents
    std::int64_t n_start = 2;
};

using TaskPlan = std::function<TaskOutput()>;

/// Checks the job against the catalog and binds its parameters. Throws SchemaError.
TaskPlan plan_job(const json &job, const JobContext &ctx);

/// Line of the value at `pointer` in JSON text, or of its closest existing ancestor.
int json_line(std::string_view text, const std::string &pointer);

struct RunOptions {
    std::filesystem::path out = "results";
    int threads = 0;
    int precision_bits = 128;
    std::optional<std::uint64_t> seed; // overrides the job's seed
};

/// Writes results.json, CSV files and manifest.json under opt.out; returns the exit code.
int run_job_text(const std::string &text, const std::string &label, const RunOptions &opt, std::ostream &log);
int run_job(const std::filesystem::path &job_file, const RunOptions &opt, std::ostream &log);

} // namespace flab
