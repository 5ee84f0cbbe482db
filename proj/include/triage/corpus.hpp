#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "triage/ontology.hpp"

namespace triage {

// Unlabelled input message.
struct Tweet {
    std::string tweet_id;
    std::string event_id;
    std::string text;
};

// Human-assessed tweet.
struct GoldRecord {
    std::string tweet_id;
    std::string event_id;
    std::string text;
    std::vector<std::string> info_types;
    PriorityLevel priority = PriorityLevel::Low;
};

// One system prediction.
struct RunRecord {
    std::string tweet_id;
    std::string event_id;
    std::vector<std::string> info_types;
    double priority_score = 0.0;
};

struct CorpusSplit {
    std::vector<GoldRecord> train;
    std::vector<GoldRecord> dev;
    std::uint64_t seed = 0;
    double ratio = 0.0;
};

inline Tweet to_tweet(const GoldRecord& record) {
    return Tweet{record.tweet_id, record.event_id, record.text};
}

// Gold file: UTF-8, one JSON object per line with keys tweet_id, event_id,
// text, info_types, priority. Labels are validated against the ontology and
// tweet ids must be unique. Throws ValidationError with the line number on
// malformed input.
std::vector<GoldRecord> load_gold(const std::string& path,
                                  const Ontology& ontology = Ontology::defaults());

// Run file: same framing with keys tweet_id, event_id, info_types,
// priority_score (decimal in [0,1]).
std::vector<RunRecord> load_run(const std::string& path,
                                const Ontology& ontology = Ontology::defaults());

// Prediction input: accepts gold-formatted lines (labels ignored) or bare
// lines with just tweet_id, event_id and text.
std::vector<Tweet> load_tweets(const std::string& path);

// Serialization is lossless: load_run(write_run(r)) == r, with scores kept
// exact through shortest-round-trip formatting.
void write_run(const std::vector<RunRecord>& records, const std::string& path);

void write_gold(const std::vector<GoldRecord>& records, const std::string& path);

// Uniform sample without replacement of ceil(ratio * N) records into dev, the
// rest into train; both keep input order. Deterministic in (corpus order,
// seed).
CorpusSplit split_train_dev(const std::vector<GoldRecord>& corpus, double ratio,
                            std::uint64_t seed = 42);

} // namespace triage
