#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "triage/corpus.hpp"
#include "triage/ontology.hpp"

namespace triage {

// The eight official scores plus their harmonic-mean summary.
struct MetricReport {
    double ndcg = 0.0;
    double aw_hc = 0.0;
    double aw_a = 0.0;
    double cf1_h = 0.0;
    double cf1_a = 0.0;
    double cacc = 0.0;
    double perr_h = 0.0;
    double perr_a = 0.0;
    double harm = 0.0;
};

enum class AlertScope { HighCritical, All };

// Alerting-worth penalty shape: the first false alert in a streak costs
// first_penalty, each further consecutive one escalation more, capped at
// max_penalty.
struct AlertWorthConfig {
    double first_penalty = 0.5;
    double escalation = 0.25;
    double max_penalty = 1.0;
};

// Graded gains per gold priority level, indexed by PriorityLevel.
using NdcgGains = std::array<double, 4>;
inline constexpr NdcgGains kDefaultNdcgGains = {0.0, 1.0, 2.0, 3.0};

struct EvalOptions {
    std::size_t ndcg_k = 100;
    bool lenient = false;  // missing gold tweets become "no types, score 0"
    NdcgGains ndcg_gains = kDefaultNdcgGains;
    AlertWorthConfig alert_worth;
};

// Tweet ids of one event's run records, descending priority score, ties
// broken by ascending tweet id.
std::vector<std::string> rank_by_priority(const std::vector<RunRecord>& run,
                                          const std::string& event_id);

// Mean over events of DCG@k / IDCG@k with gains taken from the gold priority
// level; events whose ideal gain is all zero are excluded.
double ndcg(const std::vector<RunRecord>& run, const std::vector<GoldRecord>& gold,
            std::size_t k = 100, const NdcgGains& gains = kDefaultNdcgGains,
            bool lenient = false);

// In per-event ranked order: +1 for an alert on a gold High/Critical tweet,
// -1 for silence on one, an escalating penalty for consecutive false alerts,
// 0 for correct silence. Averaged over the scoped tweets.
double alert_worth(const std::vector<RunRecord>& run, const std::vector<GoldRecord>& gold,
                   AlertScope scope, const AlertWorthConfig& config = {},
                   bool lenient = false);

// Macro F1 of the positive class over the given type indices; types with no
// gold-positive tweet are excluded.
double cf1(const std::vector<RunRecord>& run, const std::vector<GoldRecord>& gold,
           const Ontology& ontology, const std::vector<int>& type_subset,
           bool lenient = false);

// Micro accuracy over all (tweet, type) binary decisions.
double cacc(const std::vector<RunRecord>& run, const std::vector<GoldRecord>& gold,
            const Ontology& ontology, bool lenient = false);

// Mean over the given types (with >= 1 gold positive) of the 4-class priority
// macro F1 restricted to that type's gold tweets.
double perr(const std::vector<RunRecord>& run, const std::vector<GoldRecord>& gold,
            const Ontology& ontology, const std::vector<int>& type_subset,
            bool lenient = false);

// Harmonic mean of the eight scores with the alerting-worth values first
// normalized from [-1,1] to [0,1]; any zero constituent forces 0.
double harm(const MetricReport& report);

// Wilson score interval, clamped to [0,1]. trials must be >= 1.
std::pair<double, double> wilson_interval(std::uint64_t successes, std::uint64_t trials,
                                          double z = 1.96);

// Two proportions differ "confidently" when their Wilson intervals do not
// overlap.
bool confident_difference(std::pair<double, double> interval_a,
                          std::pair<double, double> interval_b);

MetricReport evaluate_all(const std::vector<RunRecord>& run,
                          const std::vector<GoldRecord>& gold,
                          const Ontology& ontology = Ontology::defaults(),
                          const EvalOptions& options = {});

// Per-event reports in ascending event-id order.
std::vector<std::pair<std::string, MetricReport>> evaluate_per_event(
    const std::vector<RunRecord>& run, const std::vector<GoldRecord>& gold,
    const Ontology& ontology = Ontology::defaults(), const EvalOptions& options = {});

} // namespace triage
