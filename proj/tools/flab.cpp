#include <cstdlib>
#include <iostream>
#include <string>

#include "CLI11.hpp"

#include "flab/jobrunner.hpp"

int main(int argc, char **argv)
{
    CLI::App app{"flab: Hardy-field sequences mod 1, job runner"};
    std::string job;
    flab::RunOptions opt;
    std::string out = opt.out.string();
    bool list = false;
    app.add_option("--job", job, "job file (JSON)");
    app.add_option("--out", out, "results directory")->capture_default_str();
    app.add_option("--threads", opt.threads, "worker threads, 0 = auto")->capture_default_str()->check(CLI::NonNegativeNumber);
    app.add_option("--precision-bits", opt.precision_bits, "MPFR working precision")
        ->capture_default_str()
        ->check(CLI::Range(64, 1024));
    app.add_flag("--list-tasks", list, "print the task catalog as JSON");
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError &e) {
        return app.exit(e) == 0 ? 0 : flab::exit_schema;
    }
    if (list) {
        std::cout << flab::task_catalog().dump(2) << "\n";
        return 0;
    }
    if (job.empty()) {
        std::cerr << "--job is required\n";
        return flab::exit_schema;
    }
    if (const char *seed = std::getenv("FLAB_SEED")) {
        try {
            std::size_t used = 0;
            opt.seed = std::stoull(seed, &used);
            if (used != std::string(seed).size())
                throw std::invalid_argument(seed);
        } catch (const std::exception &) {
            std::cerr << "FLAB_SEED must be a non-negative integer\n";
            return flab::exit_schema;
        }
    }
    opt.out = out;
    return flab::run_job(job, opt, std::cerr);
}
