#include "oracle.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "triage/rng.hpp"

namespace oracle {

namespace {

using triage::GoldRecord;
using triage::PriorityLevel;
using triage::RunRecord;

bool has_type(const std::vector<std::string>& names, const std::string& name) {
    for (const auto& candidate : names) {
        if (candidate == name) {
            return true;
        }
    }
    return false;
}

// Linear scan; tweets absent from the run score 0 with no types.
const RunRecord* find_prediction(const std::vector<RunRecord>& run, const std::string& tweet_id) {
    for (const auto& record : run) {
        if (record.tweet_id == tweet_id) {
            return &record;
        }
    }
    return nullptr;
}

double predicted_score(const std::vector<RunRecord>& run, const std::string& tweet_id) {
    const RunRecord* record = find_prediction(run, tweet_id);
    return record ? record->priority_score : 0.0;
}

bool predicted_has_type(const std::vector<RunRecord>& run, const std::string& tweet_id,
                        const std::string& type_name) {
    const RunRecord* record = find_prediction(run, tweet_id);
    return record && has_type(record->info_types, type_name);
}

int level_index(PriorityLevel level) { return static_cast<int>(level); }

int predicted_level_index(double score) {
    if (score <= 0.25) return 0;
    if (score <= 0.5) return 1;
    if (score <= 0.75) return 2;
    return 3;
}

std::vector<std::string> sorted_event_ids(const std::vector<GoldRecord>& gold) {
    std::set<std::string> ids;
    for (const auto& record : gold) {
        ids.insert(record.event_id);
    }
    return {ids.begin(), ids.end()};
}

// Ranking by repeated selection of the best remaining tweet.
std::vector<const GoldRecord*> ranked_event_tweets(const std::vector<RunRecord>& run,
                                                   const std::vector<GoldRecord>& gold,
                                                   const std::string& event_id) {
    std::vector<const GoldRecord*> remaining;
    for (const auto& record : gold) {
        if (record.event_id == event_id) {
            remaining.push_back(&record);
        }
    }
    std::vector<const GoldRecord*> ranked;
    while (!remaining.empty()) {
        std::size_t best = 0;
        for (std::size_t i = 1; i < remaining.size(); ++i) {
            const double si = predicted_score(run, remaining[i]->tweet_id);
            const double sb = predicted_score(run, remaining[best]->tweet_id);
            if (si > sb || (si == sb && remaining[i]->tweet_id < remaining[best]->tweet_id)) {
                best = i;
            }
        }
        ranked.push_back(remaining[best]);
        remaining.erase(remaining.begin() + static_cast<std::ptrdiff_t>(best));
    }
    return ranked;
}

double f1_via_precision_recall(int tp, int fp, int fn) {
    const double precision = (tp + fp) > 0 ? static_cast<double>(tp) / (tp + fp) : 0.0;
    const double recall = (tp + fn) > 0 ? static_cast<double>(tp) / (tp + fn) : 0.0;
    if (precision + recall == 0.0) {
        return 0.0;
    }
    return 2.0 * precision * recall / (precision + recall);
}

} // namespace

double ndcg(const std::vector<RunRecord>& run, const std::vector<GoldRecord>& gold,
            std::size_t k) {
    const double gains[4] = {0.0, 1.0, 2.0, 3.0};
    double total = 0.0;
    int included = 0;
    for (const auto& event_id : sorted_event_ids(gold)) {
        auto ranked = ranked_event_tweets(run, gold, event_id);

        std::vector<double> ideal;
        for (const auto* record : ranked) {
            ideal.push_back(gains[level_index(record->priority)]);
        }
        std::sort(ideal.begin(), ideal.end());
        std::reverse(ideal.begin(), ideal.end());

        double idcg = 0.0;
        double dcg = 0.0;
        for (std::size_t i = 0; i < ranked.size() && i < k; ++i) {
            const double discount = std::log2(static_cast<double>(i + 2));
            idcg += ideal[i] / discount;
            dcg += gains[level_index(ranked[i]->priority)] / discount;
        }
        if (idcg > 0.0) {
            total += dcg / idcg;
            ++included;
        }
    }
    return included > 0 ? total / included : 0.0;
}

double alert_worth(const std::vector<RunRecord>& run, const std::vector<GoldRecord>& gold,
                   bool high_critical_scope) {
    double total = 0.0;
    int scoped = 0;
    int streak = 0;
    for (const auto& event_id : sorted_event_ids(gold)) {
        for (const auto* record : ranked_event_tweets(run, gold, event_id)) {
            const bool important = record->priority == PriorityLevel::High ||
                                   record->priority == PriorityLevel::Critical;
            if (high_critical_scope && !important) {
                continue;
            }
            ++scoped;
            const bool alerted =
                predicted_level_index(predicted_score(run, record->tweet_id)) >= 2;
            if (alerted) {
                if (important) {
                    total += 1.0;
                    streak = 0;
                } else {
                    ++streak;
                    double penalty = 0.5 + 0.25 * (streak - 1);
                    if (penalty > 1.0) {
                        penalty = 1.0;
                    }
                    total -= penalty;
                }
            } else {
                if (important) {
                    total -= 1.0;
                } else {
                    streak = 0;
                }
            }
        }
    }
    return scoped > 0 ? total / scoped : 0.0;
}

double cf1(const std::vector<RunRecord>& run, const std::vector<GoldRecord>& gold,
           const std::vector<std::string>& type_names) {
    double total = 0.0;
    int included = 0;
    for (const auto& name : type_names) {
        int tp = 0, fp = 0, fn = 0, gold_positives = 0;
        for (const auto& record : gold) {
            const bool in_gold = has_type(record.info_types, name);
            const bool in_run = predicted_has_type(run, record.tweet_id, name);
            if (in_gold) {
                ++gold_positives;
            }
            if (in_gold && in_run) ++tp;
            if (!in_gold && in_run) ++fp;
            if (in_gold && !in_run) ++fn;
        }
        if (gold_positives == 0) {
            continue;
        }
        total += f1_via_precision_recall(tp, fp, fn);
        ++included;
    }
    return included > 0 ? total / included : 0.0;
}

double cacc(const std::vector<RunRecord>& run, const std::vector<GoldRecord>& gold,
            const std::vector<std::string>& type_names) {
    if (gold.empty()) {
        return 0.0;
    }
    int correct = 0;
    for (const auto& record : gold) {
        for (const auto& name : type_names) {
            const bool in_gold = has_type(record.info_types, name);
            const bool in_run = predicted_has_type(run, record.tweet_id, name);
            if (in_gold == in_run) {
                ++correct;
            }
        }
    }
    return static_cast<double>(correct) /
           static_cast<double>(gold.size() * type_names.size());
}

double perr(const std::vector<RunRecord>& run, const std::vector<GoldRecord>& gold,
            const std::vector<std::string>& type_names) {
    double total = 0.0;
    int included = 0;
    for (const auto& name : type_names) {
        std::vector<int> gold_levels;
        std::vector<int> predicted_levels;
        for (const auto& record : gold) {
            if (!has_type(record.info_types, name)) {
                continue;
            }
            gold_levels.push_back(level_index(record.priority));
            predicted_levels.push_back(
                predicted_level_index(predicted_score(run, record.tweet_id)));
        }
        if (gold_levels.empty()) {
            continue;
        }
        std::set<int> classes(gold_levels.begin(), gold_levels.end());
        classes.insert(predicted_levels.begin(), predicted_levels.end());
        double f1_total = 0.0;
        for (int cls : classes) {
            int tp = 0, fp = 0, fn = 0;
            for (std::size_t i = 0; i < gold_levels.size(); ++i) {
                if (gold_levels[i] == cls && predicted_levels[i] == cls) ++tp;
                if (gold_levels[i] != cls && predicted_levels[i] == cls) ++fp;
                if (gold_levels[i] == cls && predicted_levels[i] != cls) ++fn;
            }
            f1_total += f1_via_precision_recall(tp, fp, fn);
        }
        total += f1_total / static_cast<double>(classes.size());
        ++included;
    }
    return included > 0 ? total / included : 0.0;
}

double harm8(double ndcg_v, double aw_hc, double aw_a, double perr_h, double perr_a,
             double cf1_h, double cf1_a, double cacc_v) {
    const double values[8] = {ndcg_v, (aw_hc + 1.0) / 2.0, (aw_a + 1.0) / 2.0, perr_h,
                              perr_a, cf1_h,               cf1_a,              cacc_v};
    double sum = 0.0;
    for (double v : values) {
        if (v == 0.0) {
            return 0.0;
        }
        sum += 1.0 / v;
    }
    return 8.0 / sum;
}

triage::MetricReport evaluate_all(const std::vector<RunRecord>& run,
                                  const std::vector<GoldRecord>& gold,
                                  const triage::Ontology& ontology, std::size_t k) {
    std::vector<std::string> all_names;
    std::vector<std::string> actionable_names;
    for (const auto& type : ontology.types()) {
        all_names.push_back(type.name);
        if (type.actionable) {
            actionable_names.push_back(type.name);
        }
    }
    triage::MetricReport report;
    report.ndcg = oracle::ndcg(run, gold, k);
    report.aw_hc = oracle::alert_worth(run, gold, true);
    report.aw_a = oracle::alert_worth(run, gold, false);
    report.cf1_h = oracle::cf1(run, gold, actionable_names);
    report.cf1_a = oracle::cf1(run, gold, all_names);
    report.cacc = oracle::cacc(run, gold, all_names);
    report.perr_h = oracle::perr(run, gold, actionable_names);
    report.perr_a = oracle::perr(run, gold, all_names);
    report.harm = harm8(report.ndcg, report.aw_hc, report.aw_a, report.perr_h, report.perr_a,
                        report.cf1_h, report.cf1_a, report.cacc);
    return report;
}

const triage::Ontology& small_ontology() {
    static const triage::Ontology instance{std::vector<triage::InfoType>{
        {"Request-SearchAndRescue", true, 0},
        {"CallToAction-Donations", false, 0},
        {"Report-Weather", false, 0},
    }};
    return instance;
}

Instance random_instance(std::uint64_t seed) {
    triage::Rng rng(seed);
    const auto& ontology = small_ontology();

    Instance instance;
    const std::size_t n_tweets = 1 + rng.below(20);
    const double tie_scores[6] = {0.0, 0.25, 0.4, 0.5, 0.75, 1.0};
    for (std::size_t i = 0; i < n_tweets; ++i) {
        GoldRecord gold;
        char id[8];
        std::snprintf(id, sizeof(id), "t%03zu", i);
        gold.tweet_id = id;
        gold.event_id = rng.below(2) == 0 ? "event-a" : "event-b";
        gold.text = "text " + gold.tweet_id;
        for (const auto& type : ontology.types()) {
            if (rng.uniform() < 0.4) {
                gold.info_types.push_back(type.name);
            }
        }
        gold.priority = static_cast<PriorityLevel>(rng.below(4));

        RunRecord pred;
        pred.tweet_id = gold.tweet_id;
        pred.event_id = gold.event_id;
        for (const auto& type : ontology.types()) {
            if (rng.uniform() < 0.4) {
                pred.info_types.push_back(type.name);
            }
        }
        pred.priority_score =
            rng.uniform() < 0.5 ? tie_scores[rng.below(6)] : rng.uniform();

        instance.gold.push_back(std::move(gold));
        instance.run.push_back(std::move(pred));
    }

    // occasionally add unjudged predictions, which scoring must ignore
    if (rng.uniform() < 0.3) {
        RunRecord extra;
        extra.tweet_id = "x999";
        extra.event_id = "event-a";
        extra.priority_score = rng.uniform();
        instance.run.push_back(std::move(extra));
    }
    return instance;
}

} // namespace oracle
