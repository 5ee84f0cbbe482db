#include "triage/report.hpp"

#include <array>
#include <iomanip>
#include <sstream>

#include "triage/errors.hpp"

namespace triage {

namespace {

std::array<double, 9> row_values(const MetricReport& m) {
    return {m.ndcg, m.aw_hc, m.aw_a, m.perr_h, m.perr_a, m.cf1_h, m.cf1_a, m.cacc, m.harm};
}

constexpr const char* kColumns[9] = {"NDCG",  "AW-HC", "AW-A", "PErr-H", "PErr-A",
                                     "CF1-H", "CF1-A", "Cacc", "HarM"};

std::string precise(double value) {
    std::ostringstream out;
    out.precision(12);
    out << value;
    return out.str();
}

std::string fixed4(double value) {
    std::ostringstream out;
    out << std::fixed << std::setprecision(4) << value;
    return out.str();
}

} // namespace

std::string metric_report_csv(const MetricReport& report) {
    std::ostringstream out;
    out << "ndcg,aw_hc,aw_a,cf1_h,cf1_a,cacc,perr_h,perr_a,harm\n";
    out << precise(report.ndcg) << ',' << precise(report.aw_hc) << ',' << precise(report.aw_a)
        << ',' << precise(report.cf1_h) << ',' << precise(report.cf1_a) << ','
        << precise(report.cacc) << ',' << precise(report.perr_h) << ',' << precise(report.perr_a)
        << ',' << precise(report.harm) << '\n';
    return out.str();
}

std::string render_report_csv(const NamedReports& reports) {
    if (reports.empty()) {
        throw ValidationError("report requires at least one run");
    }
    std::ostringstream out;
    out << "run";
    for (const char* column : kColumns) {
        out << ',' << column;
    }
    out << '\n';
    for (const auto& [name, report] : reports) {
        out << name;
        for (double value : row_values(report)) {
            out << ',' << precise(value);
        }
        out << '\n';
    }
    return out.str();
}

std::string render_report_markdown(const NamedReports& reports) {
    if (reports.empty()) {
        throw ValidationError("report requires at least one run");
    }
    std::array<double, 9> best = row_values(reports[0].second);
    for (const auto& [name, report] : reports) {
        (void)name;
        const auto values = row_values(report);
        for (std::size_t i = 0; i < values.size(); ++i) {
            best[i] = std::max(best[i], values[i]);
        }
    }

    std::ostringstream out;
    out << "| Run |";
    for (const char* column : kColumns) {
        out << ' ' << column << " |";
    }
    out << "\n|---|";
    for (std::size_t i = 0; i < 9; ++i) {
        out << "---|";
    }
    out << '\n';
    for (const auto& [name, report] : reports) {
        out << "| " << name << " |";
        const auto values = row_values(report);
        for (std::size_t i = 0; i < values.size(); ++i) {
            if (values[i] == best[i]) {
                out << " **" << fixed4(values[i]) << "** |";
            } else {
                out << ' ' << fixed4(values[i]) << " |";
            }
        }
        out << '\n';
    }
    return out.str();
}

} // namespace triage
