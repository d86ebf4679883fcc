// Acceptance suite: one PASS/FAIL line per item. Exit 0 iff every item run passes.
#include <fstream>
#include <iostream>
#include <vector>

#include "CLI11.hpp"

#include "flab/acceptance.hpp"
#include "flab/engine.hpp"

int main(int argc, char **argv)
{
    CLI::App app{"acceptance suite"};
    std::vector<int> ids;
    flab::AcceptanceOptions opt;
    int threads = 0;
    std::string log;
    app.add_option("criteria", ids, "items to run, default all")->check(CLI::Range(1, flab::criterion_count));
    app.add_option("--threads", threads, "worker threads, 0 = auto")->capture_default_str();
    app.add_option("--n-large", opt.n_large, "N of the large items")->capture_default_str();
    app.add_option("--n-medium", opt.n_medium, "N of the recurrence items")->capture_default_str();
    app.add_option("--log", log, "append the summary lines to this file");
    CLI11_PARSE(app, argc, argv);
    if (ids.empty())
        for (int id = 1; id <= flab::criterion_count; ++id)
            ids.push_back(id);
    flab::set_thread_count(threads);

    bool all = true;
    for (int id : ids) {
        std::string line;
        try {
            const auto r = flab::run_criterion(id, opt);
            line = flab::summary_line(r);
            all = all && r.pass;
        } catch (const std::exception &e) {
            line = "FAIL [" + std::to_string(id) + "] " + flab::criterion_title(id) + ": error: " + e.what();
            all = false;
        }
        std::cout << line << std::endl;
        if (!log.empty())
            std::ofstream(log, std::ios::app) << line << "\n";
    }
    return all ? 0 : 1;
}
