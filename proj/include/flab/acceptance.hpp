#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "flab/experiments.hpp"

namespace flab {

struct AcceptanceOptions {
    std::int64_t n_large = 10000000; // items run at N = 1e7
    std::int64_t n_medium = 1000000; // recurrence items
    std::uint64_t seed = 0;          // random evaluation points of item 11
    int precision_bits = 128;
    int compare_threads = 8;         // second run of item 12
};

struct CriterionResult {
    int id = 0;
    std::string title;
    bool pass = false;
    std::string detail;
    std::vector<Verdict> verdicts;
};

constexpr int criterion_count = 12;

std::string criterion_title(int id);

/// Runs one acceptance item, 1 .. 12. Throws std::invalid_argument for other ids.
CriterionResult run_criterion(int id, const AcceptanceOptions &opt = {});

/// Rows query, N, re, im, abs, samples for each series in order.
std::string correlation_csv(const std::vector<CorrelationQuery> &queries, const std::vector<ComplexSeries> &series);

/// "PASS" or "FAIL", the id and title, then the detail.
std::string summary_line(const CriterionResult &r);

} // namespace flab
