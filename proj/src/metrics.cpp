#include "triage/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <map>
#include <set>
#include <unordered_map>

#include "triage/errors.hpp"

namespace triage {

namespace {

// Gold records joined with the run's prediction for the same tweet.
struct JoinedTweet {
    const GoldRecord* gold = nullptr;
    std::vector<char> gold_bits;
    std::vector<char> pred_bits;
    double pred_score = 0.0;
    PriorityLevel pred_level = PriorityLevel::Low;
};

std::vector<JoinedTweet> join(const std::vector<RunRecord>& run,
                              const std::vector<GoldRecord>& gold, const Ontology& ontology,
                              bool lenient) {
    std::unordered_map<std::string, const RunRecord*> by_id;
    by_id.reserve(run.size());
    for (const auto& record : run) {
        if (!by_id.emplace(record.tweet_id, &record).second) {
            throw ValidationError("run contains duplicate tweet_id '" + record.tweet_id + "'");
        }
    }

    std::vector<std::string> missing;
    std::vector<JoinedTweet> joined;
    joined.reserve(gold.size());
    for (const auto& record : gold) {
        JoinedTweet row;
        row.gold = &record;
        row.gold_bits.assign(ontology.size(), 0);
        for (const auto& name : record.info_types) {
            const int index = ontology.index_of(name);
            if (index < 0) {
                throw ValidationError("gold label '" + name + "' is not in the ontology");
            }
            row.gold_bits[static_cast<std::size_t>(index)] = 1;
        }
        row.pred_bits.assign(ontology.size(), 0);

        auto it = by_id.find(record.tweet_id);
        if (it == by_id.end()) {
            if (!lenient) {
                missing.push_back(record.tweet_id);
            }
            // lenient fill: no types, score 0
        } else {
            const RunRecord& pred = *it->second;
            for (const auto& name : pred.info_types) {
                const int index = ontology.index_of(name);
                if (index < 0) {
                    throw ValidationError("run label '" + name + "' is not in the ontology");
                }
                row.pred_bits[static_cast<std::size_t>(index)] = 1;
            }
            row.pred_score = pred.priority_score;
        }
        row.pred_level = score_to_priority(row.pred_score);
        joined.push_back(std::move(row));
    }
    if (!missing.empty()) {
        std::string message = "run does not cover " + std::to_string(missing.size()) +
                              " gold tweet(s):";
        for (std::size_t i = 0; i < missing.size() && i < 10; ++i) {
            message += " " + missing[i];
        }
        if (missing.size() > 10) {
            message += " ...";
        }
        throw ValidationError(message);
    }
    return joined;
}

// Descending score, ties by ascending tweet id.
void sort_ranked(std::vector<const JoinedTweet*>& rows) {
    std::sort(rows.begin(), rows.end(), [](const JoinedTweet* a, const JoinedTweet* b) {
        if (a->pred_score != b->pred_score) {
            return a->pred_score > b->pred_score;
        }
        return a->gold->tweet_id < b->gold->tweet_id;
    });
}

std::map<std::string, std::vector<const JoinedTweet*>> group_by_event(
    const std::vector<JoinedTweet>& joined) {
    std::map<std::string, std::vector<const JoinedTweet*>> events;
    for (const auto& row : joined) {
        events[row.gold->event_id].push_back(&row);
    }
    return events;
}

double ndcg_impl(const std::vector<JoinedTweet>& joined, std::size_t k, const NdcgGains& gains) {
    auto events = group_by_event(joined);
    double sum = 0.0;
    std::size_t included = 0;
    for (auto& [event_id, rows] : events) {
        (void)event_id;
        std::vector<double> ideal;
        ideal.reserve(rows.size());
        for (const auto* row : rows) {
            ideal.push_back(gains[static_cast<std::size_t>(row->gold->priority)]);
        }
        std::sort(ideal.begin(), ideal.end(), std::greater<>());

        const std::size_t depth = std::min(k, rows.size());
        double idcg = 0.0;
        for (std::size_t i = 0; i < depth; ++i) {
            idcg += ideal[i] / std::log2(static_cast<double>(i) + 2.0);
        }
        if (idcg == 0.0) {
            continue;  // no relevant tweets in this event
        }
        sort_ranked(rows);
        double dcg = 0.0;
        for (std::size_t i = 0; i < depth; ++i) {
            dcg += gains[static_cast<std::size_t>(rows[i]->gold->priority)] /
                   std::log2(static_cast<double>(i) + 2.0);
        }
        sum += dcg / idcg;
        ++included;
    }
    if (included == 0) {
        std::cerr << "warning: every event has zero ideal gain; NDCG reported as 0\n";
        return 0.0;
    }
    return sum / static_cast<double>(included);
}

double alert_worth_impl(const std::vector<JoinedTweet>& joined, AlertScope scope,
                        const AlertWorthConfig& config) {
    auto events = group_by_event(joined);

    double sum = 0.0;
    std::size_t scoped = 0;
    std::size_t false_streak = 0;
    for (auto& [event_id, rows] : events) {
        (void)event_id;
        sort_ranked(rows);
        for (const auto* row : rows) {
            const bool gold_positive = row->gold->priority == PriorityLevel::High ||
                                       row->gold->priority == PriorityLevel::Critical;
            if (scope == AlertScope::HighCritical && !gold_positive) {
                continue;
            }
            ++scoped;
            const bool alert = row->pred_level == PriorityLevel::High ||
                               row->pred_level == PriorityLevel::Critical;
            if (alert && gold_positive) {
                sum += 1.0;
                false_streak = 0;
            } else if (alert && !gold_positive) {
                ++false_streak;
                sum -= std::min(config.max_penalty,
                                config.first_penalty +
                                    config.escalation * static_cast<double>(false_streak - 1));
            } else if (!alert && gold_positive) {
                sum -= 1.0;
            } else {
                false_streak = 0;
            }
        }
    }
    if (scoped == 0) {
        return 0.0;
    }
    return sum / static_cast<double>(scoped);
}

double f1_from_counts(std::size_t tp, std::size_t fp, std::size_t fn) {
    const std::size_t denom = 2 * tp + fp + fn;
    if (denom == 0) {
        return 0.0;
    }
    return 2.0 * static_cast<double>(tp) / static_cast<double>(denom);
}

double cf1_impl(const std::vector<JoinedTweet>& joined, const std::vector<int>& type_subset) {
    double sum = 0.0;
    std::size_t included = 0;
    for (int type : type_subset) {
        const auto j = static_cast<std::size_t>(type);
        std::size_t tp = 0, fp = 0, fn = 0, positives = 0;
        for (const auto& row : joined) {
            const bool g = row.gold_bits[j] != 0;
            const bool p = row.pred_bits[j] != 0;
            positives += g;
            tp += g && p;
            fp += !g && p;
            fn += g && !p;
        }
        if (positives == 0) {
            continue;
        }
        sum += f1_from_counts(tp, fp, fn);
        ++included;
    }
    if (included == 0) {
        std::cerr << "warning: no information type has gold positives; CF1 reported as 0\n";
        return 0.0;
    }
    return sum / static_cast<double>(included);
}

double cacc_impl(const std::vector<JoinedTweet>& joined, std::size_t n_types) {
    if (joined.empty()) {
        return 0.0;
    }
    std::size_t correct = 0;
    for (const auto& row : joined) {
        for (std::size_t j = 0; j < n_types; ++j) {
            correct += row.gold_bits[j] == row.pred_bits[j];
        }
    }
    return static_cast<double>(correct) / static_cast<double>(joined.size() * n_types);
}

double perr_impl(const std::vector<JoinedTweet>& joined, const std::vector<int>& type_subset) {
    double sum = 0.0;
    std::size_t included = 0;
    for (int type : type_subset) {
        const auto j = static_cast<std::size_t>(type);
        std::array<std::array<std::size_t, kPriorityLevelCount>, kPriorityLevelCount> confusion{};
        std::size_t positives = 0;
        for (const auto& row : joined) {
            if (!row.gold_bits[j]) {
                continue;
            }
            ++positives;
            confusion[static_cast<std::size_t>(row.gold->priority)]
                     [static_cast<std::size_t>(row.pred_level)] += 1;
        }
        if (positives == 0) {
            continue;
        }
        double f1_sum = 0.0;
        std::size_t classes = 0;
        for (std::size_t c = 0; c < kPriorityLevelCount; ++c) {
            std::size_t tp = confusion[c][c];
            std::size_t fp = 0, fn = 0;
            for (std::size_t other = 0; other < kPriorityLevelCount; ++other) {
                if (other == c) {
                    continue;
                }
                fp += confusion[other][c];
                fn += confusion[c][other];
            }
            if (tp + fp + fn == 0) {
                continue;  // class absent from both gold and predictions
            }
            f1_sum += f1_from_counts(tp, fp, fn);
            ++classes;
        }
        sum += f1_sum / static_cast<double>(classes);
        ++included;
    }
    if (included == 0) {
        std::cerr << "warning: no information type has gold positives; PErr reported as 0\n";
        return 0.0;
    }
    return sum / static_cast<double>(included);
}

MetricReport evaluate_joined(const std::vector<JoinedTweet>& joined, const Ontology& ontology,
                             const EvalOptions& options) {
    MetricReport report;
    report.ndcg = ndcg_impl(joined, options.ndcg_k, options.ndcg_gains);
    report.aw_hc = alert_worth_impl(joined, AlertScope::HighCritical, options.alert_worth);
    report.aw_a = alert_worth_impl(joined, AlertScope::All, options.alert_worth);
    const auto all = ontology.all_indices();
    const auto actionable = ontology.actionable_indices();
    report.cf1_h = cf1_impl(joined, actionable);
    report.cf1_a = cf1_impl(joined, all);
    report.cacc = cacc_impl(joined, ontology.size());
    report.perr_h = perr_impl(joined, actionable);
    report.perr_a = perr_impl(joined, all);
    report.harm = harm(report);
    return report;
}

} // namespace

std::vector<std::string> rank_by_priority(const std::vector<RunRecord>& run,
                                          const std::string& event_id) {
    std::vector<const RunRecord*> rows;
    for (const auto& record : run) {
        if (record.event_id == event_id) {
            rows.push_back(&record);
        }
    }
    std::sort(rows.begin(), rows.end(), [](const RunRecord* a, const RunRecord* b) {
        if (a->priority_score != b->priority_score) {
            return a->priority_score > b->priority_score;
        }
        return a->tweet_id < b->tweet_id;
    });
    std::vector<std::string> ids;
    ids.reserve(rows.size());
    for (const auto* row : rows) {
        ids.push_back(row->tweet_id);
    }
    return ids;
}

double ndcg(const std::vector<RunRecord>& run, const std::vector<GoldRecord>& gold,
            std::size_t k, const NdcgGains& gains, bool lenient) {
    return ndcg_impl(join(run, gold, Ontology::defaults(), lenient), k, gains);
}

double alert_worth(const std::vector<RunRecord>& run, const std::vector<GoldRecord>& gold,
                   AlertScope scope, const AlertWorthConfig& config, bool lenient) {
    return alert_worth_impl(join(run, gold, Ontology::defaults(), lenient), scope, config);
}

double cf1(const std::vector<RunRecord>& run, const std::vector<GoldRecord>& gold,
           const Ontology& ontology, const std::vector<int>& type_subset, bool lenient) {
    return cf1_impl(join(run, gold, ontology, lenient), type_subset);
}

double cacc(const std::vector<RunRecord>& run, const std::vector<GoldRecord>& gold,
            const Ontology& ontology, bool lenient) {
    return cacc_impl(join(run, gold, ontology, lenient), ontology.size());
}

double perr(const std::vector<RunRecord>& run, const std::vector<GoldRecord>& gold,
            const Ontology& ontology, const std::vector<int>& type_subset, bool lenient) {
    return perr_impl(join(run, gold, ontology, lenient), type_subset);
}

double harm(const MetricReport& report) {
    const std::array<double, 8> values = {
        report.ndcg,   (report.aw_hc + 1.0) / 2.0,
        (report.aw_a + 1.0) / 2.0, report.perr_h,
        report.perr_a, report.cf1_h,
        report.cf1_a,  report.cacc,
    };
    double reciprocal_sum = 0.0;
    for (double value : values) {
        if (value == 0.0) {
            return 0.0;
        }
        reciprocal_sum += 1.0 / value;
    }
    return 8.0 / reciprocal_sum;
}

std::pair<double, double> wilson_interval(std::uint64_t successes, std::uint64_t trials,
                                          double z) {
    if (trials == 0) {
        throw std::domain_error("wilson interval requires at least one trial");
    }
    if (successes > trials) {
        throw std::domain_error("successes exceed trials");
    }
    const double n = static_cast<double>(trials);
    const double p = static_cast<double>(successes) / n;
    const double z2 = z * z;
    const double denom = 1.0 + z2 / n;
    const double center = p + z2 / (2.0 * n);
    const double margin = z * std::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n));
    const double lower = std::max(0.0, (center - margin) / denom);
    const double upper = std::min(1.0, (center + margin) / denom);
    return {lower, upper};
}

bool confident_difference(std::pair<double, double> interval_a,
                          std::pair<double, double> interval_b) {
    return interval_a.second < interval_b.first || interval_b.second < interval_a.first;
}

MetricReport evaluate_all(const std::vector<RunRecord>& run, const std::vector<GoldRecord>& gold,
                          const Ontology& ontology, const EvalOptions& options) {
    return evaluate_joined(join(run, gold, ontology, options.lenient), ontology, options);
}

std::vector<std::pair<std::string, MetricReport>> evaluate_per_event(
    const std::vector<RunRecord>& run, const std::vector<GoldRecord>& gold,
    const Ontology& ontology, const EvalOptions& options) {
    std::set<std::string> event_ids;
    for (const auto& record : gold) {
        event_ids.insert(record.event_id);
    }
    std::vector<std::pair<std::string, MetricReport>> reports;
    for (const auto& event_id : event_ids) {
        std::vector<GoldRecord> event_gold;
        for (const auto& record : gold) {
            if (record.event_id == event_id) {
                event_gold.push_back(record);
            }
        }
        std::vector<RunRecord> event_run;
        for (const auto& record : run) {
            if (record.event_id == event_id) {
                event_run.push_back(record);
            }
        }
        reports.emplace_back(event_id,
                             evaluate_all(event_run, event_gold, ontology, options));
    }
    return reports;
}

} // namespace triage
