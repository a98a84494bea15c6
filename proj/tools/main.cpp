#include <CLI11.hpp>

#include <algorithm>
#include <exception>
#include <iostream>

#include "commands.hpp"

using namespace semiscale::tools;

namespace {

void add_kernel_options(CLI::App* cmd, std::string& semifield, double& alpha, double& time,
                        std::array<double, 4>& metric) {
    cmd->add_option("--semifield", semifield, "linear | root:p | log:mu | tmax | tmin")->required();
    cmd->add_option("--alpha", alpha, "kernel exponent alpha > 1")->capture_default_str();
    cmd->add_option("--time", time, "scale t > 0")->capture_default_str();
    cmd->add_option_function<std::vector<double>>(
           "--metric", [&metric](const std::vector<double>& h) { std::copy(h.begin(), h.end(), metric.begin()); },
           "h11,h12,h21,h22")
        ->delimiter(',')
        ->expected(4);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"semifield scale-spaces and PDE-CNNs"};
    app.require_subcommand(1);

    FilterArgs filter;
    auto* f = app.add_subcommand("filter", "apply one scale-space step to an image");
    add_kernel_options(f, filter.semifield, filter.alpha, filter.time, filter.metric);
    f->add_option("--boundary", filter.boundary, "replicate | reflect | zero | periodic")->capture_default_str();
    f->add_option("input", filter.input, "input image (PNG, PGM, PPM)")->required()->check(CLI::ExistingFile);
    f->add_option("output", filter.output, "output image")->required();

    KernelArgs kernel;
    auto* k = app.add_subcommand("kernel", "dump a sampled kernel as CSV");
    add_kernel_options(k, kernel.semifield, kernel.alpha, kernel.time, kernel.metric);
    k->add_option("--radius", kernel.radius, "half-width; 0 picks the default");
    k->add_option("--csv", kernel.csv, "output CSV")->required();

    VerifyArgs verify;
    auto* v = app.add_subcommand("verify", "run the property suites");
    v->add_option("--suite", verify.suite)
        ->check(CLI::IsMember({"core", "kernels", "transforms", "conv", "layers", "all"}))
        ->capture_default_str();
    v->add_option("--report", verify.report, "CSV report path (default stdout)");

    TrainArgs train;
    auto* t = app.add_subcommand("train", "train a PDE-CNN");
    t->add_option("--config", train.config, "network JSON")->required()->check(CLI::ExistingFile);
    t->add_option("--data", train.data, "synthetic:SEED or drive:PATH")->required();
    t->add_option("--out", train.out, "checkpoint path")->required();
    t->add_option("--fraction", train.fraction, "fraction of training data to keep")
        ->check(CLI::Range(0.0, 1.0))
        ->capture_default_str();
    t->add_option("--log", train.log, "training log CSV (default <out>.log.csv)");
    t->add_option("--max-batches", train.max_batches);
    t->add_option("--target-dice", train.target_dice, "stop once test Dice reaches this");
    t->add_option("--time-budget", train.time_budget, "stop at the first evaluation after this many seconds");
    t->add_flag("--quiet", train.quiet);

    EvalArgs eval;
    auto* e = app.add_subcommand("eval", "test Dice of a checkpoint");
    e->add_option("--ckpt", eval.ckpt)->required()->check(CLI::ExistingFile);
    e->add_option("--data", eval.data, "synthetic:SEED or drive:PATH")->required();

    PlotArgs plot;
    auto* p = app.add_subcommand("plot", "reshape a training log into a learning curve");
    p->add_option("--log", plot.log)->required()->check(CLI::ExistingFile);
    p->add_option("--out", plot.out)->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (f->parsed()) return run_filter(filter);
        if (k->parsed()) return run_kernel(kernel);
        if (v->parsed()) return run_verify(verify);
        if (t->parsed()) return run_train(train);
        if (e->parsed()) return run_eval(eval);
        if (p->parsed()) return run_plot(plot);
    } catch (const std::exception& ex) {
        std::cerr << "error: " << ex.what() << "\n";
        return 1;
    }
    return 1;
}
