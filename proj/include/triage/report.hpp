#pragma once

#include <string>
#include <utility>
#include <vector>

#include "triage/metrics.hpp"

namespace triage {

// Single-row CSV with header ndcg,aw_hc,aw_a,cf1_h,cf1_a,cacc,perr_h,perr_a,harm.
std::string metric_report_csv(const MetricReport& report);

using NamedReports = std::vector<std::pair<std::string, MetricReport>>;

// One row per run, columns NDCG, AW-HC, AW-A, PErr-H, PErr-A, CF1-H, CF1-A,
// Cacc, HarM.
std::string render_report_csv(const NamedReports& reports);

// Same layout as a markdown table; each column's maximum is bold.
std::string render_report_markdown(const NamedReports& reports);

} // namespace triage
