#pragma once

#include <charconv>
#include <fstream>
#include <iostream>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "pfla/experiment.hpp"

namespace pfla {

enum class ReportFormat { csv, json };

inline constexpr std::string_view kCsvHeader =
    "env,eta,n_mc,replications,seed,accuracy,mean_iterations,stddev_iterations,nonconverged,wall_time_s";

inline ReportFormat parse_report_format(std::string_view s) {
    if (s == "csv") {
        return ReportFormat::csv;
    }
    if (s == "json") {
        return ReportFormat::json;
    }
    throw std::invalid_argument("unknown report format '" + std::string(s) + "' (expected csv or json)");
}

/// Shortest decimal text that reads back to the same double.
inline std::string format_number(double v) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return {buf, res.ptr};
}

inline std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) {
        return s;
    }
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') {
            out += '"';
        }
        out += c;
    }
    return out + '"';
}

inline std::string csv_row(const ExperimentReport& r) {
    std::string row = csv_field(r.env);
    for (const std::string& f :
         {format_number(r.eta), std::to_string(r.mc_samples), std::to_string(r.replications),
          std::to_string(r.seed), format_number(r.accuracy), format_number(r.mean_iterations),
          format_number(r.stddev_iterations), std::to_string(r.nonconverged),
          format_number(r.wall_time_s)}) {
        row += ',';
        row += f;
    }
    return row;
}

inline void write_csv(std::ostream& os, const std::vector<ExperimentReport>& reports) {
    os << kCsvHeader << '\n';
    for (const auto& r : reports) {
        os << csv_row(r) << '\n';
    }
}

inline nlohmann::json to_json(const ExperimentReport& r) {
    return {
        {"env", r.env},
        {"eta", r.eta},
        {"n_mc", r.mc_samples},
        {"replications", r.replications},
        {"seed", r.seed},
        {"accuracy", r.accuracy},
        {"mean_iterations", r.mean_iterations},
        {"stddev_iterations", r.stddev_iterations},
        {"mean_iterations_ci95", r.mean_iterations_ci95()},
        {"nonconverged", r.nonconverged},
        {"correct", r.correct},
        {"estimates", r.estimates},
        {"total_iterations", r.total_iterations},
        {"wall_time_s", r.wall_time_s},
    };
}

inline ExperimentReport report_from_json(const nlohmann::json& j) {
    ExperimentReport r;
    r.env = j.at("env").get<std::string>();
    r.eta = j.at("eta").get<double>();
    r.mc_samples = j.at("n_mc").get<std::uint64_t>();
    r.replications = j.at("replications").get<std::uint64_t>();
    r.seed = j.at("seed").get<std::uint64_t>();
    r.accuracy = j.at("accuracy").get<double>();
    r.mean_iterations = j.at("mean_iterations").get<double>();
    r.stddev_iterations = j.at("stddev_iterations").get<double>();
    r.nonconverged = j.at("nonconverged").get<std::uint64_t>();
    r.correct = j.value("correct", std::uint64_t{0});
    r.estimates = j.value("estimates", std::uint64_t{0});
    r.total_iterations = j.value("total_iterations", std::uint64_t{0});
    r.wall_time_s = j.at("wall_time_s").get<double>();
    return r;
}

inline void write_json(std::ostream& os, const std::vector<ExperimentReport>& reports) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& r : reports) {
        arr.push_back(to_json(r));
    }
    os << arr.dump(2) << '\n';
}

inline std::vector<ExperimentReport> parse_json_reports(std::string_view text) {
    const auto j = nlohmann::json::parse(text);
    std::vector<ExperimentReport> out;
    for (const auto& item : j) {
        out.push_back(report_from_json(item));
    }
    return out;
}

inline void write_report(std::ostream& os, const std::vector<ExperimentReport>& reports,
                         ReportFormat format) {
    if (format == ReportFormat::csv) {
        write_csv(os, reports);
    } else {
        write_json(os, reports);
    }
}

/// Writes to `path`, or to stdout when no path is given.
inline void emit_report(const std::vector<ExperimentReport>& reports, ReportFormat format,
                        const std::optional<std::string>& path = std::nullopt) {
    if (reports.empty()) {
        throw std::invalid_argument("emit_report: no reports");
    }
    if (!path) {
        write_report(std::cout, reports, format);
        std::cout.flush();
        return;
    }
    std::ofstream out(*path);
    if (!out) {
        throw std::runtime_error("cannot open '" + *path + "' for writing");
    }
    write_report(out, reports, format);
    out.flush();
    if (!out) {
        throw std::runtime_error("failed writing '" + *path + "'");
    }
}

}  // namespace pfla
