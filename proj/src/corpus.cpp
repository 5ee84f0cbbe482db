#include "triage/corpus.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <unordered_set>

#include <json.hpp>

#include "triage/errors.hpp"
#include "triage/rng.hpp"

namespace triage {

namespace {

using nlohmann::json;

std::string at_line(const std::string& path, std::size_t line_no) {
    return path + ":" + std::to_string(line_no) + ": ";
}

json parse_line(const std::string& path, std::size_t line_no, const std::string& line) {
    json object;
    try {
        object = json::parse(line);
    } catch (const json::parse_error& e) {
        throw ValidationError(at_line(path, line_no) + "malformed record: " + e.what());
    }
    if (!object.is_object()) {
        throw ValidationError(at_line(path, line_no) + "record is not an object");
    }
    return object;
}

void check_keys(const std::string& path, std::size_t line_no, const json& object,
                const std::set<std::string>& expected) {
    for (const auto& item : object.items()) {
        if (!expected.count(item.key())) {
            throw ValidationError(at_line(path, line_no) + "unexpected key '" + item.key() + "'");
        }
    }
    for (const auto& key : expected) {
        if (!object.contains(key)) {
            throw ValidationError(at_line(path, line_no) + "missing key '" + key + "'");
        }
    }
}

std::string get_string(const std::string& path, std::size_t line_no, const json& object,
                       const char* key) {
    const auto& value = object.at(key);
    if (!value.is_string()) {
        throw ValidationError(at_line(path, line_no) + "key '" + key + "' must be a string");
    }
    return value.get<std::string>();
}

std::vector<std::string> get_info_types(const std::string& path, std::size_t line_no,
                                        const json& object, const Ontology& ontology) {
    const auto& value = object.at("info_types");
    if (!value.is_array()) {
        throw ValidationError(at_line(path, line_no) + "info_types must be an array");
    }
    std::vector<std::string> names;
    std::unordered_set<std::string> seen;
    for (const auto& entry : value) {
        if (!entry.is_string()) {
            throw ValidationError(at_line(path, line_no) + "info_types entries must be strings");
        }
        std::string name = entry.get<std::string>();
        if (!ontology.contains(name)) {
            throw ValidationError(at_line(path, line_no) + "unknown information type '" + name + "'");
        }
        if (!seen.insert(name).second) {
            throw ValidationError(at_line(path, line_no) + "duplicate information type '" + name + "'");
        }
        names.push_back(std::move(name));
    }
    return names;
}

std::string json_string(const std::string& value) { return json(value).dump(); }

std::string json_array(const std::vector<std::string>& values) {
    std::string out = "[";
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (i > 0) {
            out += ", ";
        }
        out += json_string(values[i]);
    }
    out += "]";
    return out;
}

template <typename Fn>
void for_each_line(const std::string& path, Fn&& fn) {
    std::ifstream in(path);
    if (!in) {
        throw ValidationError("cannot open file: " + path);
    }
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
        fn(line_no, line);
    }
}

} // namespace

std::vector<GoldRecord> load_gold(const std::string& path, const Ontology& ontology) {
    static const std::set<std::string> keys = {"tweet_id", "event_id", "text", "info_types",
                                               "priority"};
    std::vector<GoldRecord> records;
    std::unordered_set<std::string> ids;
    for_each_line(path, [&](std::size_t line_no, const std::string& line) {
        json object = parse_line(path, line_no, line);
        check_keys(path, line_no, object, keys);
        GoldRecord record;
        record.tweet_id = get_string(path, line_no, object, "tweet_id");
        record.event_id = get_string(path, line_no, object, "event_id");
        record.text = get_string(path, line_no, object, "text");
        record.info_types = get_info_types(path, line_no, object, ontology);
        std::string priority = get_string(path, line_no, object, "priority");
        try {
            record.priority = parse_priority(priority);
        } catch (const ValidationError& e) {
            throw ValidationError(at_line(path, line_no) + e.what());
        }
        if (!ids.insert(record.tweet_id).second) {
            throw ValidationError(at_line(path, line_no) + "duplicate tweet_id '" +
                                  record.tweet_id + "'");
        }
        records.push_back(std::move(record));
    });
    return records;
}

std::vector<RunRecord> load_run(const std::string& path, const Ontology& ontology) {
    static const std::set<std::string> keys = {"tweet_id", "event_id", "info_types",
                                               "priority_score"};
    std::vector<RunRecord> records;
    std::unordered_set<std::string> ids;
    for_each_line(path, [&](std::size_t line_no, const std::string& line) {
        json object = parse_line(path, line_no, line);
        check_keys(path, line_no, object, keys);
        RunRecord record;
        record.tweet_id = get_string(path, line_no, object, "tweet_id");
        record.event_id = get_string(path, line_no, object, "event_id");
        record.info_types = get_info_types(path, line_no, object, ontology);
        const auto& score = object.at("priority_score");
        if (!score.is_number()) {
            throw ValidationError(at_line(path, line_no) + "priority_score must be a number");
        }
        record.priority_score = score.get<double>();
        if (!(record.priority_score >= 0.0 && record.priority_score <= 1.0)) {
            throw ValidationError(at_line(path, line_no) + "priority_score outside [0,1]: " +
                                  std::to_string(record.priority_score));
        }
        if (!ids.insert(record.tweet_id).second) {
            throw ValidationError(at_line(path, line_no) + "duplicate tweet_id '" +
                                  record.tweet_id + "'");
        }
        records.push_back(std::move(record));
    });
    return records;
}

std::vector<Tweet> load_tweets(const std::string& path) {
    static const std::set<std::string> allowed = {"tweet_id", "event_id", "text", "info_types",
                                                  "priority"};
    std::vector<Tweet> tweets;
    std::unordered_set<std::string> ids;
    for_each_line(path, [&](std::size_t line_no, const std::string& line) {
        json object = parse_line(path, line_no, line);
        for (const auto& item : object.items()) {
            if (!allowed.count(item.key())) {
                throw ValidationError(at_line(path, line_no) + "unexpected key '" + item.key() +
                                      "'");
            }
        }
        Tweet tweet;
        tweet.tweet_id = get_string(path, line_no, object, "tweet_id");
        tweet.event_id = get_string(path, line_no, object, "event_id");
        tweet.text = get_string(path, line_no, object, "text");
        if (!ids.insert(tweet.tweet_id).second) {
            throw ValidationError(at_line(path, line_no) + "duplicate tweet_id '" +
                                  tweet.tweet_id + "'");
        }
        tweets.push_back(std::move(tweet));
    });
    return tweets;
}

void write_run(const std::vector<RunRecord>& records, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw ValidationError("cannot open file for writing: " + path);
    }
    for (const auto& record : records) {
        out << "{\"tweet_id\": " << json_string(record.tweet_id)
            << ", \"event_id\": " << json_string(record.event_id)
            << ", \"info_types\": " << json_array(record.info_types)
            << ", \"priority_score\": " << json(record.priority_score).dump() << "}\n";
    }
    if (!out.flush()) {
        throw ValidationError("write failed: " + path);
    }
}

void write_gold(const std::vector<GoldRecord>& records, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw ValidationError("cannot open file for writing: " + path);
    }
    for (const auto& record : records) {
        out << "{\"tweet_id\": " << json_string(record.tweet_id)
            << ", \"event_id\": " << json_string(record.event_id)
            << ", \"text\": " << json_string(record.text)
            << ", \"info_types\": " << json_array(record.info_types)
            << ", \"priority\": " << json_string(priority_name(record.priority)) << "}\n";
    }
    if (!out.flush()) {
        throw ValidationError("write failed: " + path);
    }
}

CorpusSplit split_train_dev(const std::vector<GoldRecord>& corpus, double ratio,
                            std::uint64_t seed) {
    if (!(ratio >= 0.0 && ratio < 1.0)) {
        throw ValidationError("split ratio must lie in [0,1)");
    }
    const std::size_t n = corpus.size();
    const auto dev_size = static_cast<std::size_t>(std::ceil(ratio * static_cast<double>(n)));

    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) {
        order[i] = i;
    }
    Rng rng(seed);
    rng.shuffle(order);

    std::vector<bool> in_dev(n, false);
    for (std::size_t i = 0; i < dev_size; ++i) {
        in_dev[order[i]] = true;
    }

    CorpusSplit split;
    split.seed = seed;
    split.ratio = ratio;
    for (std::size_t i = 0; i < n; ++i) {
        (in_dev[i] ? split.dev : split.train).push_back(corpus[i]);
    }
    return split;
}

} // namespace triage
