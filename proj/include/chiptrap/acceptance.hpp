#pragma once

#include <functional>
#include <string>
#include <vector>

#include "chiptrap/io.hpp"

namespace chiptrap {

struct CriterionResult {
    int id = 0;
    std::string title;
    bool passed = false;
    std::string detail;
    double seconds = 0.0;
};

struct AcceptanceOptions {
    unsigned threads = 0;
    // Subset of criteria to run (empty: all ten).
    std::vector<int> only;
    std::function<void(const CriterionResult&)> on_result;
};

// Runs the acceptance criteria starting from cfg.trap (calibrated first).
std::vector<CriterionResult> run_acceptance(const RunConfig& cfg, const AcceptanceOptions& opt = {});

std::string format_result(const CriterionResult& r);

// int_0^1 exp(i w tau) u_blackman(tau) dtau in closed form.
std::complex<double> blackman_spectrum(double w);

}  // namespace chiptrap
