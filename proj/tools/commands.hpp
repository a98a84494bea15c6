#pragma once

#include <array>
#include <optional>
#include <string>

namespace semiscale::tools {

struct FilterArgs {
    std::string semifield = "linear";
    double alpha = 2.0;
    double time = 1.0;
    std::array<double, 4> metric{1.0, 0.0, 0.0, 1.0};
    std::string boundary = "replicate";
    std::string input;
    std::string output;
};

struct KernelArgs {
    std::string semifield = "linear";
    double alpha = 2.0;
    double time = 1.0;
    std::array<double, 4> metric{1.0, 0.0, 0.0, 1.0};
    int radius = 0;  // 0: default radius
    std::string csv;
};

struct VerifyArgs {
    std::string suite = "all";
    std::string report;  // empty: CSV on stdout
};

struct TrainArgs {
    std::string config;
    std::string data;
    std::string out;
    double fraction = 1.0;
    std::string log;  // default: <out>.log.csv
    std::optional<long> max_batches;
    std::optional<double> target_dice;
    std::optional<double> time_budget;
    bool quiet = false;
};

struct EvalArgs {
    std::string ckpt;
    std::string data;
};

struct PlotArgs {
    std::string log;
    std::string out;
};

int run_filter(const FilterArgs& args);
int run_kernel(const KernelArgs& args);
int run_verify(const VerifyArgs& args);
int run_train(const TrainArgs& args);
int run_eval(const EvalArgs& args);
int run_plot(const PlotArgs& args);

}  // namespace semiscale::tools
