#include "commands.hpp"

#include <algorithm>
#include <fstream>
#include <iostream>
#include <stdexcept>

#include "semiscale/csv.hpp"
#include "semiscale/data_source.hpp"
#include "semiscale/image_io.hpp"
#include "semiscale/kernel.hpp"
#include "semiscale/layers.hpp"
#include "semiscale/network.hpp"
#include "semiscale/semiconv.hpp"
#include "semiscale/trainer.hpp"
#include "verify_suites.hpp"

namespace semiscale::tools {

namespace {

KernelSpec make_spec(const std::string& semifield, double alpha, double time, const std::array<double, 4>& h) {
    KernelSpec spec{SemifieldKind::parse(semifield), alpha, time, Mat2::from_entries(h)};
    spec.validate();
    return spec;
}

std::string read_text(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open '" + path + "'");
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

CsvRow log_row(const LogRow& r) {
    return {std::to_string(r.batch), csv_number(r.lr), csv_number(r.train_loss),
            r.test_dice ? csv_number(*r.test_dice) : std::string()};
}

}  // namespace

int run_filter(const FilterArgs& args) {
    KernelSpec spec = make_spec(args.semifield, args.alpha, args.time, args.metric);
    Grid2 field = to_grayscale(load_image(args.input));
    if (spec.kind.tag() == SemifieldTag::Root) {
        // Black pixels sit on the semifield zero; lift them off it.
        for (double& v : field.values()) v = std::max(v, kRootInputFloor);
    }
    auto kernel = sample_kernel(spec);
    Grid2 out = convolve(spec.kind, kernel, field, parse_boundary(args.boundary));
    save_image(out, args.output);
    std::cerr << "filtered " << field.width() << "x" << field.height() << " with " << spec.kind.name()
              << " radius " << kernel.radius << "\n";
    return 0;
}

int run_kernel(const KernelArgs& args) {
    KernelSpec spec = make_spec(args.semifield, args.alpha, args.time, args.metric);
    if (args.radius < 0) throw std::invalid_argument("radius must be non-negative");
    auto kernel = args.radius > 0 ? sample_kernel(spec, args.radius) : sample_kernel(spec);
    std::vector<CsvRow> rows;
    for (int dy = -kernel.radius; dy <= kernel.radius; ++dy) {
        for (int dx = -kernel.radius; dx <= kernel.radius; ++dx) {
            rows.push_back({std::to_string(dx), std::to_string(dy), csv_number(kernel.at(dx, dy))});
        }
    }
    write_csv_file(args.csv, {"dx", "dy", "value"}, rows);
    return 0;
}

int run_verify(const VerifyArgs& args) {
    if (args.suite != "all") {
        auto names = suite_names();
        if (std::find(names.begin(), names.end(), args.suite) == names.end()) {
            throw std::invalid_argument("unknown suite '" + args.suite + "'");
        }
    }
    auto results = run_suite(args.suite);
    std::vector<CsvRow> rows;
    std::size_t failed = 0;
    for (const auto& r : results) {
        rows.push_back({r.suite, r.name, r.passed ? "pass" : "fail", csv_number(r.seconds), r.detail});
        if (!r.passed) {
            ++failed;
            std::cerr << "FAIL " << r.suite << ": " << r.name << " (" << r.detail << ")\n";
        }
    }
    CsvRow header{"suite", "check", "result", "seconds", "detail"};
    if (args.report.empty()) {
        write_csv(std::cout, header, rows);
    } else {
        write_csv_file(args.report, header, rows);
    }
    std::cerr << results.size() - failed << "/" << results.size() << " checks passed\n";
    return failed == 0 ? 0 : 1;
}

int run_train(const TrainArgs& args) {
    NetworkConfig config = NetworkConfig::from_json(read_text(args.config));
    DataSource source = DataSource::parse(args.data);
    Dataset train_set = load_split(source, Split::Train);
    Dataset test_set = load_split(source, Split::Test);
    if (args.fraction < 1.0) train_set = train_set.subsample(args.fraction, config.seed);
    const int channels = static_cast<int>(train_set.images.front().size());
    if (channels != config.input_channels) {
        throw std::invalid_argument("config expects " + std::to_string(config.input_channels) +
                                    " input channels but the data has " + std::to_string(channels));
    }

    Network network(config);
    std::string log_path = args.log.empty() ? args.out + ".log.csv" : args.log;
    std::ofstream log(log_path, std::ios::binary);
    if (!log) throw std::runtime_error("cannot write '" + log_path + "'");
    write_csv_row(log, {"batch", "lr", "train_loss", "test_dice"});

    TrainOptions options;
    if (args.max_batches) options.max_batches = *args.max_batches;
    options.target_dice = args.target_dice;
    options.time_budget = args.time_budget;
    options.on_row = [&](const LogRow& r) {
        write_csv_row(log, log_row(r));
        if (r.test_dice) {
            log.flush();
            if (!args.quiet) {
                std::cerr << "batch " << r.batch << " loss " << r.train_loss << " test dice " << *r.test_dice
                          << "\n";
            }
        }
    };
    if (!args.quiet) {
        std::cerr << "training " << network.parameter_count() << " parameters on " << train_set.size()
                  << " samples, testing on " << test_set.size() << "\n";
    }
    TrainResult result = train(network, train_set, test_set, options);
    save_checkpoint(args.out, network, result.state);
    std::cout << "best_dice," << csv_number(result.state.best_dice) << "\n"
              << "best_batch," << result.state.best_batch << "\n"
              << "batches," << result.state.batch << "\n"
              << "seconds," << csv_number(result.seconds) << "\n";
    return 0;
}

int run_eval(const EvalArgs& args) {
    auto checkpoint = load_checkpoint(args.ckpt);
    Network network = network_from_checkpoint(checkpoint);
    Dataset test_set = load_split(DataSource::parse(args.data), Split::Test);
    const int channels = static_cast<int>(test_set.images.front().size());
    if (channels != checkpoint.config.input_channels) {
        throw std::invalid_argument("checkpoint expects " + std::to_string(checkpoint.config.input_channels) +
                                    " input channels but the data has " + std::to_string(channels));
    }
    double dice = evaluate_dice(network, test_set, checkpoint.config.training.batch_size);
    write_csv(std::cout, {"samples", "test_dice"}, {{std::to_string(test_set.size()), csv_number(dice)}});
    return 0;
}

int run_plot(const PlotArgs& args) {
    auto rows = read_csv_file(args.log);
    if (rows.empty()) throw std::runtime_error("empty log '" + args.log + "'");
    const CsvRow expected{"batch", "lr", "train_loss", "test_dice"};
    if (rows.front() != expected) throw std::runtime_error("'" + args.log + "' is not a training log");

    // One point per evaluation: mean training loss since the previous
    // evaluation, test Dice, best Dice so far and its distance to a perfect
    // score (non-increasing by construction).
    std::vector<CsvRow> out;
    double loss_sum = 0.0;
    long loss_count = 0;
    double best = -1.0;
    for (std::size_t i = 1; i < rows.size(); ++i) {
        const auto& r = rows[i];
        if (r.size() != 4) throw std::runtime_error("malformed log row " + std::to_string(i + 1));
        loss_sum += std::stod(r[2]);
        ++loss_count;
        if (r[3].empty()) continue;
        double dice = std::stod(r[3]);
        best = std::max(best, dice);
        out.push_back({r[0], csv_number(loss_sum / loss_count), csv_number(dice), csv_number(best),
                       csv_number(1.0 - best)});
        loss_sum = 0.0;
        loss_count = 0;
    }
    write_csv_file(args.out, {"batch", "train_loss_mean", "test_dice", "best_dice", "best_dice_gap"}, out);
    return 0;
}

}  // namespace semiscale::tools
