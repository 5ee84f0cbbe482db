#pragma once

#include <string>
#include <vector>

#include "triage/corpus.hpp"
#include "triage/ontology.hpp"

namespace triage {

enum class TypeStrategy { Union, Intersection };
enum class PriorityStrategy { Highest, Average, Lowest };

struct EnsembleConfig {
    TypeStrategy types = TypeStrategy::Union;
    PriorityStrategy priority = PriorityStrategy::Highest;
};

TypeStrategy parse_type_strategy(const std::string& name);
PriorityStrategy parse_priority_strategy(const std::string& name);
const char* type_strategy_name(TypeStrategy strategy);
const char* priority_strategy_name(PriorityStrategy strategy);

// Set union or intersection of the member label sets, returned sorted.
std::vector<std::string> merge_info_types(
    const std::vector<std::vector<std::string>>& member_sets, TypeStrategy strategy);

// Highest/Lowest pick the extreme level; Average maps levels to scores,
// averages, and maps back.
PriorityLevel merge_priority(const std::vector<PriorityLevel>& member_levels,
                             PriorityStrategy strategy);

// Merges member runs tweet by tweet. All members must cover exactly the same
// tweet ids. The output priority score is the max / mean / min of the raw
// member scores for Highest / Average / Lowest; under Average that score can
// fall in a different level bin than the level-averaged merge, and the merged
// level is the authoritative one for level-based use.
std::vector<RunRecord> ensemble_runs(const std::vector<std::vector<RunRecord>>& members,
                                     const EnsembleConfig& config = {});

} // namespace triage
