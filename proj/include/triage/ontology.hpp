#pragma once

#include <cstddef>
#include <map>
#include <string>
#include <vector>

namespace triage {

// One categorical label describing what aid-relevant information a tweet
// carries. `index` is the label's position in probability vectors.
struct InfoType {
    std::string name;
    bool actionable = false;
    int index = 0;
};

// Ordered criticality of a tweet.
enum class PriorityLevel { Low = 0, Medium = 1, High = 2, Critical = 3 };

inline constexpr int kPriorityLevelCount = 4;

// Immutable label space. Instances are cheap to copy; the default set is a
// process-lifetime singleton safe for concurrent reads.
class Ontology {
public:
    explicit Ontology(std::vector<InfoType> types);

    // The built-in 25-label set (6 actionable).
    static const Ontology& defaults();

    // Override file: one label per line, optionally followed by a tab and the
    // word "actionable". Line order defines indices.
    static Ontology from_file(const std::string& path);

    const std::vector<InfoType>& types() const { return types_; }
    std::size_t size() const { return types_.size(); }
    const InfoType& at(std::size_t index) const { return types_.at(index); }

    // -1 when the label is unknown.
    int index_of(const std::string& name) const;
    bool contains(const std::string& name) const { return index_of(name) >= 0; }

    std::vector<int> all_indices() const;
    std::vector<int> actionable_indices() const;

private:
    std::vector<InfoType> types_;
    std::map<std::string, int> index_by_name_;
};

// m(.): Critical 1.0, High 0.75, Medium 0.5, Low 0.25. Strictly increasing
// in level order.
double priority_to_score(PriorityLevel level);

// Reverse mapping with half-open bins so the round trip through
// priority_to_score is exact: Low on [0, 0.25], Medium on (0.25, 0.5],
// High on (0.5, 0.75], Critical on (0.75, 1].
// Throws std::domain_error outside [0, 1].
PriorityLevel score_to_priority(double score);

const char* priority_name(PriorityLevel level);

// Throws ValidationError for anything outside the four canonical names.
PriorityLevel parse_priority(const std::string& name);

} // namespace triage
