#include "triage/ontology.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <stdexcept>

#include "triage/errors.hpp"

namespace triage {

Ontology::Ontology(std::vector<InfoType> types) : types_(std::move(types)) {
    if (types_.empty()) {
        throw ValidationError("ontology must contain at least one information type");
    }
    for (std::size_t i = 0; i < types_.size(); ++i) {
        types_[i].index = static_cast<int>(i);
        auto [it, inserted] = index_by_name_.emplace(types_[i].name, static_cast<int>(i));
        (void)it;
        if (!inserted) {
            throw ValidationError("duplicate information type name: " + types_[i].name);
        }
    }
}

const Ontology& Ontology::defaults() {
    static const Ontology instance{std::vector<InfoType>{
        {"Request-GoodsServices", true, 0},
        {"Request-SearchAndRescue", true, 0},
        {"Report-NewSubEvent", true, 0},
        {"Report-ServiceAvailable", true, 0},
        {"CallToAction-MovePeople", true, 0},
        {"Report-EmergingThreats", true, 0},
        {"CallToAction-Volunteer", false, 0},
        {"CallToAction-Donations", false, 0},
        {"Report-Weather", false, 0},
        {"Report-Location", false, 0},
        {"Request-InformationWanted", false, 0},
        {"Report-FirstPartyObservation", false, 0},
        {"Report-ThirdPartyObservation", false, 0},
        {"Report-MultimediaShare", false, 0},
        {"Report-Factoid", false, 0},
        {"Report-Official", false, 0},
        {"Report-News", false, 0},
        {"Report-CleanUp", false, 0},
        {"Report-Hashtags", false, 0},
        {"Report-OriginalEvent", false, 0},
        {"Other-ContextualInformation", false, 0},
        {"Other-Advice", false, 0},
        {"Other-Sentiment", false, 0},
        {"Other-Discussion", false, 0},
        {"Other-Irrelevant", false, 0},
    }};
    return instance;
}

Ontology Ontology::from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw ValidationError("cannot open ontology file: " + path);
    }
    std::vector<InfoType> types;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') {
            line.pop_back();
        }
        if (line.empty()) {
            continue;
        }
        InfoType type;
        auto tab = line.find('\t');
        if (tab == std::string::npos) {
            type.name = line;
        } else {
            type.name = line.substr(0, tab);
            std::string marker = line.substr(tab + 1);
            if (marker == "actionable") {
                type.actionable = true;
            } else if (!marker.empty()) {
                throw ValidationError("ontology file " + path + " line " +
                                      std::to_string(line_no) +
                                      ": unknown marker '" + marker + "'");
            }
        }
        if (type.name.empty()) {
            throw ValidationError("ontology file " + path + " line " +
                                  std::to_string(line_no) + ": empty label");
        }
        types.push_back(std::move(type));
    }
    return Ontology(std::move(types));
}

int Ontology::index_of(const std::string& name) const {
    auto it = index_by_name_.find(name);
    return it == index_by_name_.end() ? -1 : it->second;
}

std::vector<int> Ontology::all_indices() const {
    std::vector<int> out(types_.size());
    for (std::size_t i = 0; i < types_.size(); ++i) {
        out[i] = static_cast<int>(i);
    }
    return out;
}

std::vector<int> Ontology::actionable_indices() const {
    std::vector<int> out;
    for (const auto& type : types_) {
        if (type.actionable) {
            out.push_back(type.index);
        }
    }
    return out;
}

double priority_to_score(PriorityLevel level) {
    switch (level) {
        case PriorityLevel::Low: return 0.25;
        case PriorityLevel::Medium: return 0.5;
        case PriorityLevel::High: return 0.75;
        case PriorityLevel::Critical: return 1.0;
    }
    throw std::logic_error("invalid priority level");
}

PriorityLevel score_to_priority(double score) {
    if (!(score >= 0.0 && score <= 1.0)) {
        throw std::domain_error("priority score outside [0,1]: " + std::to_string(score));
    }
    if (score <= 0.25) return PriorityLevel::Low;
    if (score <= 0.5) return PriorityLevel::Medium;
    if (score <= 0.75) return PriorityLevel::High;
    return PriorityLevel::Critical;
}

const char* priority_name(PriorityLevel level) {
    switch (level) {
        case PriorityLevel::Low: return "Low";
        case PriorityLevel::Medium: return "Medium";
        case PriorityLevel::High: return "High";
        case PriorityLevel::Critical: return "Critical";
    }
    throw std::logic_error("invalid priority level");
}

PriorityLevel parse_priority(const std::string& name) {
    if (name == "Low") return PriorityLevel::Low;
    if (name == "Medium") return PriorityLevel::Medium;
    if (name == "High") return PriorityLevel::High;
    if (name == "Critical") return PriorityLevel::Critical;
    throw ValidationError("unknown priority level: '" + name + "'");
}

} // namespace triage
