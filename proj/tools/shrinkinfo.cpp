// shrinkinfo: reproduce the MSE, power, Lambda-information and semi-tail
// comparisons of the ML and James-Stein estimators on the normal-means family.
//
// Exit codes: 0 success, 1 usage error, 2 numerical failure.

#include <cmath>
#include <filesystem>
#include <iostream>
#include <map>
#include <string>
#include <thread>

#include <CLI11.hpp>

#include "shrinkinfo/cli.hpp"

namespace {

using shrinkinfo::OutputFormat;
using namespace shrinkinfo::cli;

struct Flags {
    RunOptions opts;
    std::string output;
    std::string format = "csv";
    double figure_theta = 0.0;
};

const CLI::Validator open_unit_interval(
    [](std::string& s) -> std::string {
        const double a = std::stod(s);
        return a > 0.0 && a < 1.0 ? std::string() : "significance level must lie in (0, 1)";
    },
    "in (0, 1)");

const CLI::Validator finite_number(
    [](std::string& s) -> std::string {
        return std::isfinite(std::stod(s)) ? std::string() : "value must be finite";
    },
    "finite");

void add_common(CLI::App* cmd, Flags& f, bool takes_thetas) {
    cmd->add_option("--k", f.opts.k, "Dimension of the normal mean")->check(CLI::Range(1, 100));
    if (takes_thetas) {
        cmd->add_option("--theta", f.opts.thetas, "Subfamily parameter (repeatable)")
            ->take_all()
            ->check(finite_number);
    }
    cmd->add_option("--samples", f.opts.samples, "Monte Carlo samples per cell")->check(CLI::PositiveNumber);
    cmd->add_option("--seed", f.opts.seed, "Base seed");
    cmd->add_option("--workers", f.opts.workers, "Worker threads (results do not depend on it)")
        ->check(CLI::PositiveNumber);
    cmd->add_option("--alpha", f.opts.alphas, "Significance level (repeatable)")->take_all()->check(open_unit_interval);
    cmd->add_option("--output", f.output, "Output file (directory for 'all'); standard output if omitted");
    cmd->add_option("--format", f.format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
}

void emit(const std::string& command, const Flags& f, const nlohmann::json& thetas, const std::string& data,
          std::chrono::steady_clock::time_point start) {
    RunManifest manifest{command, thetas, f.opts, 0.0, nlohmann::json::array()};
    manifest.duration_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (f.output.empty()) {
        std::cout << data;
        std::cout.flush();
        std::cerr << manifest.to_json().dump() << '\n';
    } else {
        manifest.outputs.push_back({{"file", std::filesystem::path(f.output).filename().string()}, {"status", "ok"}});
        write_file(f.output, data);
        write_file(f.output + ".manifest.json", manifest.to_json().dump(2) + "\n");
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Assess ML and James-Stein estimators of a normal mean by MSE, power and Lambda-information"};
    app.set_version_flag("--version", std::string(shrinkinfo::version));
    app.require_subcommand(1);

    Flags f;
    f.opts.workers = std::max(1u, std::thread::hardware_concurrency());
    bool quiet = false;
    app.add_flag("--quiet", quiet, "Suppress progress messages");

    auto* t1 = app.add_subcommand("table1", "MSE of JS and ML per theta");
    auto* t2 = app.add_subcommand("table2", "Power of the JS and ML tests of H0: mu = 1.25 * 1");
    auto* t3 = app.add_subcommand("table3", "Scalar Lambda-information and mean efficiency");
    auto* fig = app.add_subcommand("figure", "Paired semi-tail values of the JS and ML tests");
    auto* all = app.add_subcommand("all", "Run every reproduction into an output directory");
    for (auto* cmd : {t1, t2, t3, all}) {
        add_common(cmd, f, true);
    }
    add_common(fig, f, false);
    fig->add_option("--theta", f.figure_theta, "Alternative theta")->required()->check(finite_number);
    for (auto* cmd : {fig, all}) {
        cmd->add_option("--points", f.opts.points, "Samples per figure")->check(CLI::PositiveNumber);
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::Success& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 1;
    }

    if (!quiet) {
        f.opts.progress = [](const std::string& message) { std::cerr << "[shrinkinfo] " << message << '\n'; };
    }
    const OutputFormat format = f.format == "json" ? OutputFormat::json : OutputFormat::csv;
    const auto start = std::chrono::steady_clock::now();

    try {
        if (t1->parsed()) {
            emit("table1", f, f.opts.thetas_or(table1_thetas), render(table1(f.opts), format), start);
        } else if (t2->parsed()) {
            emit("table2", f, f.opts.thetas_or(table2_thetas), render(table2(f.opts), format), start);
        } else if (t3->parsed()) {
            emit("table3", f, f.opts.thetas_or(table3_thetas), render(table3(f.opts), format), start);
        } else if (fig->parsed()) {
            emit("figure", f, nlohmann::json::array({f.figure_theta}), render(figure(f.opts, f.figure_theta), format),
                 start);
        } else if (all->parsed()) {
            const std::filesystem::path dir = f.output.empty() ? "shrinkinfo-out" : f.output;
            const AllResult result = run_all(f.opts, dir, format);
            for (const auto& failure : result.failures) {
                std::cerr << "shrinkinfo: " << failure << '\n';
            }
            return result.exit_code;
        }
    } catch (const std::invalid_argument& e) {
        std::cerr << "shrinkinfo: " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "shrinkinfo: " << e.what() << '\n';
        return 2;
    }
    return 0;
}
