#pragma once

#include <string>
#include <vector>

namespace semiscale::tools {

struct CheckResult {
    std::string suite;
    std::string name;
    bool passed = false;
    std::string detail;
    double seconds = 0.0;
};

/// Suites: core, kernels, transforms, conv, layers, all.
std::vector<std::string> suite_names();
std::vector<CheckResult> run_suite(const std::string& suite);

}  // namespace semiscale::tools
