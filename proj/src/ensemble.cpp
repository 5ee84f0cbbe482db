#include "triage/ensemble.hpp"

#include <algorithm>
#include <set>
#include <unordered_map>

#include "triage/errors.hpp"

namespace triage {

TypeStrategy parse_type_strategy(const std::string& name) {
    if (name == "union") return TypeStrategy::Union;
    if (name == "intersection") return TypeStrategy::Intersection;
    throw ValidationError("unknown type strategy '" + name + "' (expected union|intersection)");
}

PriorityStrategy parse_priority_strategy(const std::string& name) {
    if (name == "highest") return PriorityStrategy::Highest;
    if (name == "average") return PriorityStrategy::Average;
    if (name == "lowest") return PriorityStrategy::Lowest;
    throw ValidationError("unknown priority strategy '" + name +
                          "' (expected highest|average|lowest)");
}

const char* type_strategy_name(TypeStrategy strategy) {
    return strategy == TypeStrategy::Union ? "union" : "intersection";
}

const char* priority_strategy_name(PriorityStrategy strategy) {
    switch (strategy) {
        case PriorityStrategy::Highest: return "highest";
        case PriorityStrategy::Average: return "average";
        case PriorityStrategy::Lowest: return "lowest";
    }
    return "?";
}

std::vector<std::string> merge_info_types(
    const std::vector<std::vector<std::string>>& member_sets, TypeStrategy strategy) {
    if (member_sets.empty()) {
        throw ValidationError("merge requires at least one member");
    }
    std::set<std::string> merged(member_sets[0].begin(), member_sets[0].end());
    for (std::size_t i = 1; i < member_sets.size(); ++i) {
        const std::set<std::string> other(member_sets[i].begin(), member_sets[i].end());
        if (strategy == TypeStrategy::Union) {
            merged.insert(other.begin(), other.end());
        } else {
            std::set<std::string> intersection;
            std::set_intersection(merged.begin(), merged.end(), other.begin(), other.end(),
                                  std::inserter(intersection, intersection.begin()));
            merged = std::move(intersection);
        }
    }
    return {merged.begin(), merged.end()};
}

PriorityLevel merge_priority(const std::vector<PriorityLevel>& member_levels,
                             PriorityStrategy strategy) {
    if (member_levels.empty()) {
        throw ValidationError("merge requires at least one member");
    }
    switch (strategy) {
        case PriorityStrategy::Highest:
            return *std::max_element(member_levels.begin(), member_levels.end());
        case PriorityStrategy::Lowest:
            return *std::min_element(member_levels.begin(), member_levels.end());
        case PriorityStrategy::Average: {
            double sum = 0.0;
            for (PriorityLevel level : member_levels) {
                sum += priority_to_score(level);
            }
            return score_to_priority(sum / static_cast<double>(member_levels.size()));
        }
    }
    throw std::logic_error("invalid priority strategy");
}

std::vector<RunRecord> ensemble_runs(const std::vector<std::vector<RunRecord>>& members,
                                     const EnsembleConfig& config) {
    if (members.empty()) {
        throw ValidationError("ensemble requires at least one member run");
    }

    // Coverage check: identical tweet universes across members.
    std::vector<std::unordered_map<std::string, const RunRecord*>> by_id(members.size());
    for (std::size_t m = 0; m < members.size(); ++m) {
        for (const auto& record : members[m]) {
            if (!by_id[m].emplace(record.tweet_id, &record).second) {
                throw ValidationError("member " + std::to_string(m + 1) +
                                      " contains duplicate tweet_id '" + record.tweet_id + "'");
            }
        }
    }
    for (std::size_t m = 1; m < members.size(); ++m) {
        std::vector<std::string> missing;
        for (const auto& record : members[0]) {
            if (!by_id[m].count(record.tweet_id)) {
                missing.push_back(record.tweet_id);
            }
        }
        for (const auto& record : members[m]) {
            if (!by_id[0].count(record.tweet_id)) {
                missing.push_back(record.tweet_id);
            }
        }
        if (!missing.empty()) {
            std::string message = "member " + std::to_string(m + 1) +
                                  " covers a different tweet set; mismatched ids:";
            for (std::size_t i = 0; i < missing.size() && i < 10; ++i) {
                message += " " + missing[i];
            }
            if (missing.size() > 10) {
                message += " ...";
            }
            throw ValidationError(message);
        }
    }

    std::vector<RunRecord> merged;
    merged.reserve(members[0].size());
    for (const auto& base : members[0]) {
        std::vector<std::vector<std::string>> type_sets;
        std::vector<double> scores;
        type_sets.reserve(members.size());
        scores.reserve(members.size());
        for (std::size_t m = 0; m < members.size(); ++m) {
            const RunRecord& record = *by_id[m].at(base.tweet_id);
            type_sets.push_back(record.info_types);
            scores.push_back(record.priority_score);
        }

        RunRecord out;
        out.tweet_id = base.tweet_id;
        out.event_id = base.event_id;
        out.info_types = merge_info_types(type_sets, config.types);
        switch (config.priority) {
            case PriorityStrategy::Highest:
                out.priority_score = *std::max_element(scores.begin(), scores.end());
                break;
            case PriorityStrategy::Lowest:
                out.priority_score = *std::min_element(scores.begin(), scores.end());
                break;
            case PriorityStrategy::Average: {
                double sum = 0.0;
                for (double score : scores) {
                    sum += score;
                }
                out.priority_score = sum / static_cast<double>(scores.size());
                break;
            }
        }
        merged.push_back(std::move(out));
    }
    return merged;
}

} // namespace triage
