#include <cstdio>
#include <string>

#include "CLI11.hpp"
#include "chiptrap/acceptance.hpp"
#include "chiptrap/errors.hpp"

using namespace chiptrap;

int main(int argc, char** argv) {
    CLI::App app{"chiptrap acceptance suite"};
    std::string config;
    std::string only;
    unsigned threads = 0;
    app.add_option("--config", config, "run configuration (defaults: paper parameters, nominal geometry)");
    app.add_option("--only", only, "comma-separated criterion numbers");
    app.add_option("--threads", threads, "worker threads (0: all cores)");
    CLI11_PARSE(app, argc, argv);

    try {
        RunConfig cfg = config.empty() ? RunConfig{} : load_run_config(config);
        if (config.empty()) cfg.validate();
        AcceptanceOptions opt;
        opt.threads = threads;
        if (!only.empty())
            for (double v : parse_number_list(only)) opt.only.push_back(static_cast<int>(v));
        opt.on_result = [](const CriterionResult& r) {
            std::printf("%s\n", format_result(r).c_str());
            std::fflush(stdout);
        };
        const auto results = run_acceptance(cfg, opt);
        int failed = 0;
        for (const auto& r : results) failed += !r.passed;
        std::printf("%zu criteria, %d passed, %d failed\n", results.size(), static_cast<int>(results.size()) - failed, failed);
        return failed ? 1 : 0;
    } catch (const Error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return static_cast<int>(e.exit_code());
    }
}
