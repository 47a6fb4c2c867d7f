#pragma once

// Batch reproductions behind the command-line tool. Each command returns
// plain tables; the tool only parses flags and writes files.

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <exception>
#include <functional>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <nlohmann/json.hpp>

#include "shrinkinfo/assess.hpp"
#include "shrinkinfo/hyptest.hpp"
#include "shrinkinfo/mc.hpp"
#include "shrinkinfo/report.hpp"
#include "shrinkinfo/version.hpp"

namespace shrinkinfo::cli {

inline const std::vector<double> table1_thetas{0.0, 0.5, 1.25, 2.0, 2.5};
inline const std::vector<double> table2_thetas{0.0, 0.5, 1.0, 1.25, 1.5, 2.0, 2.5};
inline const std::vector<double> table3_thetas = table1_thetas;
inline const std::vector<double> figure_thetas{0.5, 2.0};
inline const std::vector<double> default_alphas{0.01, 0.05};
inline constexpr std::uint64_t default_points = 100;

// Semi-tail band of the conventional p-value range [0.001, 0.1].
inline constexpr double typical_s_low = 3.32;
inline constexpr double typical_s_high = 9.97;

struct RunOptions {
    int k = 14;
    std::vector<double> thetas;  // empty: the command's default list
    std::uint64_t samples = default_samples;
    std::uint64_t seed = default_seed;
    unsigned workers = 1;
    std::vector<double> alphas = default_alphas;
    std::uint64_t points = default_points;
    std::function<void(const std::string&)> progress;

    SimulationConfig config() const {
        SimulationConfig c;
        c.k = k;
        c.n_samples = samples;
        c.seed = seed;
        c.n_workers = workers;
        return c;
    }

    const std::vector<double>& thetas_or(const std::vector<double>& fallback) const {
        return thetas.empty() ? fallback : thetas;
    }

    void report(const std::string& message) const {
        if (progress) {
            progress(message);
        }
    }
};

inline std::vector<AssessmentReport> assess_cells(const RunOptions& opts, const std::vector<double>& thetas) {
    std::vector<AssessmentReport> reports;
    for (EstimatorKind kind : {EstimatorKind::js, EstimatorKind::ml}) {
        for (double theta : thetas) {
            opts.report("assess " + std::string(to_string(kind)) + " theta=" + format_number(theta));
            reports.push_back(assess(kind, theta, opts.config()));
        }
    }
    return reports;
}

inline Table table1_from(const std::vector<AssessmentReport>& reports) {
    Table t{{"estimator", "theta", "mse", "stderr"}, {}};
    for (const auto& r : reports) {
        t.add_row({std::string(to_string(r.estimator)), r.theta, r.mse, r.mse_stderr});
    }
    return t;
}

inline Table table3_from(const std::vector<AssessmentReport>& reports) {
    Table t{{"estimator", "theta", "scalar_lambda", "mean_efficiency", "eigen_min", "eigen_max", "stderr"}, {}};
    for (const auto& r : reports) {
        t.add_row({std::string(to_string(r.estimator)), r.theta, r.scalar_lambda, r.mean_efficiency, r.eigen_min,
                   r.eigen_max, r.scalar_lambda_stderr});
    }
    return t;
}

// MSE rows come from a lighter pass than the full assessment but on the same
// stream, so the numbers agree with table1_from(assess_cells(...)).
inline Table table1(const RunOptions& opts) {
    Table t{{"estimator", "theta", "mse", "stderr"}, {}};
    for (EstimatorKind kind : {EstimatorKind::js, EstimatorKind::ml}) {
        for (double theta : opts.thetas_or(table1_thetas)) {
            opts.report("mse " + std::string(to_string(kind)) + " theta=" + format_number(theta));
            const auto m = mse_with_stderr(kind, theta, opts.config());
            t.add_row({std::string(to_string(kind)), theta, m.value, m.std_error});
        }
    }
    return t;
}

inline Table table3(const RunOptions& opts) { return table3_from(assess_cells(opts, opts.thetas_or(table3_thetas))); }

struct Calibrations {
    NullCalibration js;
    NullCalibration ml;
};

inline Calibrations calibrate(const RunOptions& opts) {
    SimulationConfig null = opts.config();
    null.theta = default_null_theta;
    opts.report("calibrate JS null");
    auto js = calibrate_null(EstimatorKind::js, null, opts.alphas);
    opts.report("calibrate ML null");
    auto ml = calibrate_null(EstimatorKind::ml, null, opts.alphas);
    return {std::move(js), std::move(ml)};
}

inline Table critical_value_table(const Calibrations& calibrations) {
    Table t{{"test", "alpha", "critical_value", "n_null"}, {}};
    for (const NullCalibration* c : {&calibrations.js, &calibrations.ml}) {
        for (const auto& [alpha, critical] : c->critical_values) {
            t.add_row({std::string(to_string(c->kind)), alpha, critical, c->n_null});
        }
    }
    return t;
}

// Rows grouped as in the published layout: per alpha, JS then ML.
inline Table table2_from(const RunOptions& opts, const Calibrations& calibrations) {
    const auto& thetas = opts.thetas_or(table2_thetas);
    struct Row {
        EstimatorKind kind;
        double theta;
        PowerCell cell;
    };
    std::vector<Row> rows;
    for (const NullCalibration* c : {&calibrations.js, &calibrations.ml}) {
        for (double theta : thetas) {
            opts.report("power " + std::string(to_string(c->kind)) + " theta=" + format_number(theta));
            for (const auto& cell : power(c->kind, theta, *c, opts.config())) {
                rows.push_back({c->kind, theta, cell});
            }
        }
    }
    Table t{{"test", "alpha", "theta", "power", "stderr"}, {}};
    for (const auto& [alpha, unused] : calibrations.ml.critical_values) {
        for (EstimatorKind kind : {EstimatorKind::js, EstimatorKind::ml}) {
            for (const auto& r : rows) {
                if (r.kind == kind && r.cell.alpha == alpha) {
                    t.add_row({std::string(to_string(kind)), alpha, r.theta, r.cell.power, r.cell.std_error});
                }
            }
        }
    }
    return t;
}

inline Table table2(const RunOptions& opts) { return table2_from(opts, calibrate(opts)); }

struct FigureData {
    double theta = 0.0;
    Table points;
    nlohmann::json reference_lines;
};

inline nlohmann::json figure_reference_lines() {
    return nlohmann::json::array({
        {{"name", "equality"}, {"intercept", 0.0}, {"slope", 1.0}},
        {{"name", "one_unit_shift"},
         {"intercept", 1.0},
         {"slope", 1.0},
         {"s_js_min", typical_s_low},
         {"s_js_max", typical_s_high}},
    });
}

inline FigureData figure_from(const RunOptions& opts, double theta, const Calibrations& calibrations) {
    opts.report("figure theta=" + format_number(theta));
    FigureData fig{theta, {{"index", "s_js", "s_ml", "shrinkage"}, {}}, figure_reference_lines()};
    for (const auto& p : paired_semitail(theta, opts.points, calibrations.js, calibrations.ml, opts.config())) {
        fig.points.add_row({p.sample_index, p.s_js, p.s_ml, p.shrinkage});
    }
    return fig;
}

inline FigureData figure(const RunOptions& opts, double theta) {
    return figure_from(opts, theta, calibrate(opts));
}

inline std::string render(const Table& table, OutputFormat format) {
    if (format == OutputFormat::csv) {
        return to_csv(table);
    }
    return to_json(table).dump(2) + "\n";
}

inline std::string render(const FigureData& fig, OutputFormat format) {
    if (format == OutputFormat::csv) {
        return to_csv(fig.points);
    }
    nlohmann::json doc = to_json(fig.points);
    doc["theta"] = fig.theta;
    doc["reference_lines"] = fig.reference_lines;
    return doc.dump(2) + "\n";
}

struct RunManifest {
    std::string command;
    nlohmann::json thetas;
    RunOptions options;
    double duration_seconds = 0.0;
    nlohmann::json outputs = nlohmann::json::array();

    nlohmann::json to_json() const {
        return {
            {"command", command},
            {"k", options.k},
            {"thetas", thetas},
            {"samples", options.samples},
            {"seed", options.seed},
            {"workers", options.workers},
            {"alphas", options.alphas},
            {"points", options.points},
            {"version", version},
            {"duration_seconds", duration_seconds},
            {"outputs", outputs},
            {"reference_lines", figure_reference_lines()},
        };
    }
};

inline void write_file(const std::filesystem::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw std::runtime_error("cannot open " + path.string() + " for writing");
    }
    out << content;
    if (!out) {
        throw std::runtime_error("failed writing " + path.string());
    }
}

struct AllResult {
    bool ok = true;
    int exit_code = 0;
    std::vector<std::string> failures;
};

inline int exit_code_for(const std::exception_ptr& error) {
    try {
        std::rethrow_exception(error);
    } catch (const NumericalError&) {
        return 2;
    } catch (const DomainError&) {
        return 2;
    } catch (const std::invalid_argument&) {
        return 1;
    } catch (...) {
        return 2;
    }
}

// Runs every reproduction into `dir`: table1, table2, table3, the null
// critical values, the two figure point sets and manifest.json. A failing
// step leaves `<file>.FAILED` holding the error and the others still run.
inline AllResult run_all(const RunOptions& opts, const std::filesystem::path& dir, OutputFormat format) {
    const auto start = std::chrono::steady_clock::now();
    std::filesystem::create_directories(dir);
    const std::string ext = format == OutputFormat::csv ? ".csv" : ".json";
    AllResult result;
    RunManifest manifest{"all", {}, opts, 0.0, nlohmann::json::array()};

    auto attempt = [&](const std::string& name, const std::function<std::string()>& produce) {
        const auto file = dir / (name + ext);
        const auto marker = dir / (name + ext + ".FAILED");
        std::error_code ignored;
        std::filesystem::remove(marker, ignored);
        try {
            write_file(file, produce());
            manifest.outputs.push_back({{"file", file.filename().string()}, {"status", "ok"}});
        } catch (const std::exception& e) {
            std::filesystem::remove(file, ignored);
            write_file(marker, std::string(e.what()) + "\n");
            const int code = exit_code_for(std::current_exception());
            result.ok = false;
            result.exit_code = std::max(result.exit_code, code);
            result.failures.push_back(name + ": " + e.what());
            manifest.outputs.push_back(
                {{"file", marker.filename().string()}, {"status", "failed"}, {"error", e.what()}});
        }
    };

    const auto& t13 = opts.thetas_or(table1_thetas);
    std::vector<AssessmentReport> reports;
    std::exception_ptr assess_error;
    try {
        reports = assess_cells(opts, t13);
    } catch (...) {
        assess_error = std::current_exception();
    }
    auto from_reports = [&](const std::function<Table(const std::vector<AssessmentReport>&)>& build) {
        return [&, build] {
            if (assess_error) {
                std::rethrow_exception(assess_error);
            }
            return render(build(reports), format);
        };
    };
    attempt("table1", from_reports(table1_from));
    attempt("table3", from_reports(table3_from));

    std::optional<Calibrations> calibrations;
    std::exception_ptr calibration_error;
    try {
        calibrations = calibrate(opts);
    } catch (...) {
        calibration_error = std::current_exception();
    }
    auto with_calibrations = [&](const std::function<std::string(const Calibrations&)>& produce) {
        return [&, produce] {
            if (calibration_error) {
                std::rethrow_exception(calibration_error);
            }
            return produce(*calibrations);
        };
    };
    attempt("critical_values",
            with_calibrations([&](const Calibrations& c) { return render(critical_value_table(c), format); }));
    attempt("table2", with_calibrations([&](const Calibrations& c) { return render(table2_from(opts, c), format); }));
    for (double theta : figure_thetas) {
        attempt("figure_theta_" + format_number(theta), with_calibrations([&, theta](const Calibrations& c) {
                    return render(figure_from(opts, theta, c), format);
                }));
    }

    manifest.thetas = {{"table1", t13},
                       {"table2", opts.thetas_or(table2_thetas)},
                       {"table3", t13},
                       {"figure", figure_thetas}};
    manifest.duration_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    write_file(dir / "manifest.json", manifest.to_json().dump(2) + "\n");
    return result;
}

}  // namespace shrinkinfo::cli
