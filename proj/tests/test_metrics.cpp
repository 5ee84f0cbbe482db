#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "triage/errors.hpp"
#include "triage/metrics.hpp"
#include "triage/rng.hpp"

#include "oracle.hpp"

using namespace triage;

namespace {

GoldRecord gold_of(const std::string& id, const std::string& event, PriorityLevel priority,
                   std::vector<std::string> types = {}) {
    return {id, event, "text " + id, std::move(types), priority};
}

RunRecord pred_of(const std::string& id, const std::string& event, double score,
                  std::vector<std::string> types = {}) {
    return {id, event, std::move(types), score};
}

// derived from a run whose scores are exactly m(gold level) and whose type
// sets equal the gold sets
std::vector<RunRecord> perfect_run(const std::vector<GoldRecord>& gold) {
    std::vector<RunRecord> run;
    for (const auto& record : gold) {
        run.push_back({record.tweet_id, record.event_id, record.info_types,
                       priority_to_score(record.priority)});
    }
    return run;
}

} // namespace

TEST_CASE("rank_by_priority orders by score then id") {
    std::vector<RunRecord> run = {
        pred_of("b", "e1", 0.1),
        pred_of("a", "e1", 0.9),
        pred_of("c", "e1", 0.5),
        pred_of("z", "e2", 1.0),
    };
    CHECK(rank_by_priority(run, "e1") == std::vector<std::string>{"a", "c", "b"});

    std::vector<RunRecord> tied = {
        pred_of("beta", "e1", 0.5),
        pred_of("alpha", "e1", 0.5),
    };
    CHECK(rank_by_priority(tied, "e1") == std::vector<std::string>{"alpha", "beta"});

    std::vector<RunRecord> single = {pred_of("only", "e1", 0.4)};
    CHECK(rank_by_priority(single, "e1") == std::vector<std::string>{"only"});
}

TEST_CASE("ndcg hand-traced values") {
    SUBCASE("ideal ranking scores 1") {
        std::vector<GoldRecord> gold = {
            gold_of("a", "e", PriorityLevel::Critical),
            gold_of("b", "e", PriorityLevel::Medium),
            gold_of("c", "e", PriorityLevel::Low),
        };
        auto run = perfect_run(gold);
        CHECK(ndcg(run, gold) == doctest::Approx(1.0).epsilon(1e-12));
    }

    SUBCASE("gains 3,1,0 ranked as 0,3,1") {
        // system scores put the zero-gain tweet first, then the 3, then the 1
        std::vector<GoldRecord> gold = {
            gold_of("crit", "e", PriorityLevel::Critical),
            gold_of("med", "e", PriorityLevel::Medium),
            gold_of("low", "e", PriorityLevel::Low),
        };
        std::vector<RunRecord> run = {
            pred_of("low", "e", 0.9),
            pred_of("crit", "e", 0.6),
            pred_of("med", "e", 0.3),
        };
        CHECK(ndcg(run, gold) == doctest::Approx(0.6590018048024133).epsilon(1e-12));
    }

    SUBCASE("events with zero ideal gain are excluded") {
        std::vector<GoldRecord> gold = {
            gold_of("a", "dead", PriorityLevel::Low),
            gold_of("b", "dead", PriorityLevel::Low),
            gold_of("c", "live", PriorityLevel::Critical),
        };
        auto run = perfect_run(gold);
        CHECK(ndcg(run, gold) == doctest::Approx(1.0).epsilon(1e-12));

        std::vector<GoldRecord> all_dead = {gold_of("a", "dead", PriorityLevel::Low)};
        CHECK(ndcg(perfect_run(all_dead), all_dead) == 0.0);
    }

    SUBCASE("invariant to positive monotone score transforms") {
        Rng rng(6);
        for (int trial = 0; trial < 25; ++trial) {
            auto instance = oracle::random_instance(9000 + trial);
            const double base = ndcg(instance.run, instance.gold, 100);
            auto transformed = instance.run;
            for (auto& record : transformed) {
                record.priority_score = record.priority_score * record.priority_score;
            }
            CHECK(ndcg(transformed, instance.gold, 100) ==
                  doctest::Approx(base).epsilon(1e-12));
        }
    }
}

TEST_CASE("alert worth hand-traced values") {
    SUBCASE("all correct alerts in scope scores +1") {
        std::vector<GoldRecord> gold = {
            gold_of("a", "e", PriorityLevel::Critical),
            gold_of("b", "e", PriorityLevel::High),
        };
        auto run = perfect_run(gold);
        CHECK(alert_worth(run, gold, AlertScope::HighCritical) == 1.0);
        CHECK(alert_worth(run, gold, AlertScope::All) == 1.0);
    }

    SUBCASE("total silence on critical gold scores -1") {
        std::vector<GoldRecord> gold = {
            gold_of("a", "e", PriorityLevel::Critical),
            gold_of("b", "e", PriorityLevel::Critical),
        };
        std::vector<RunRecord> run = {pred_of("a", "e", 0.1), pred_of("b", "e", 0.2)};
        CHECK(alert_worth(run, gold, AlertScope::HighCritical) == -1.0);
    }

    SUBCASE("escalating penalty for consecutive false alerts") {
        // ranked gold (C, L, L, H) with predictions (C, H, H, L)
        std::vector<GoldRecord> gold = {
            gold_of("t1", "e", PriorityLevel::Critical),
            gold_of("t2", "e", PriorityLevel::Low),
            gold_of("t3", "e", PriorityLevel::Low),
            gold_of("t4", "e", PriorityLevel::High),
        };
        std::vector<RunRecord> run = {
            pred_of("t1", "e", 1.0),   // alert, correct: +1
            pred_of("t2", "e", 0.75),  // false alert #1: -0.5
            pred_of("t3", "e", 0.7),   // false alert #2: -0.75
            pred_of("t4", "e", 0.1),   // silence on High: -1
        };
        CHECK(alert_worth(run, gold, AlertScope::All) ==
              doctest::Approx(-0.3125).epsilon(1e-12));
    }

    SUBCASE("high/critical scope ignores other tweets") {
        std::vector<GoldRecord> gold = {
            gold_of("a", "e", PriorityLevel::Low),
            gold_of("b", "e", PriorityLevel::Critical),
        };
        std::vector<RunRecord> run = {
            pred_of("a", "e", 0.9),  // false alert, but outside the HC scope
            pred_of("b", "e", 0.8),
        };
        CHECK(alert_worth(run, gold, AlertScope::HighCritical) == 1.0);
        CHECK(alert_worth(run, gold, AlertScope::All) == doctest::Approx(0.25).epsilon(1e-12));
    }

    SUBCASE("empty scope yields 0") {
        std::vector<GoldRecord> gold = {gold_of("a", "e", PriorityLevel::Low)};
        std::vector<RunRecord> run = {pred_of("a", "e", 0.1)};
        CHECK(alert_worth(run, gold, AlertScope::HighCritical) == 0.0);
    }
}

TEST_CASE("cf1 and cacc") {
    const auto& ontology = oracle::small_ontology();
    std::vector<GoldRecord> gold = {
        gold_of("a", "e", PriorityLevel::Low, {"Request-SearchAndRescue"}),
        gold_of("b", "e", PriorityLevel::Low, {"Request-SearchAndRescue", "Report-Weather"}),
        gold_of("c", "e", PriorityLevel::Low, {"CallToAction-Donations"}),
        gold_of("d", "e", PriorityLevel::Low),
    };

    SUBCASE("perfect predictions score 1") {
        auto run = perfect_run(gold);
        CHECK(cf1(run, gold, ontology, ontology.all_indices()) == 1.0);
        CHECK(cf1(run, gold, ontology, ontology.actionable_indices()) == 1.0);
        CHECK(cacc(run, gold, ontology) == 1.0);
    }

    SUBCASE("disjoint predictions score 0") {
        std::vector<RunRecord> run = {
            pred_of("a", "e", 0.1, {"Report-Weather"}),
            pred_of("b", "e", 0.1),
            pred_of("c", "e", 0.1, {"Request-SearchAndRescue"}),
            pred_of("d", "e", 0.1, {"CallToAction-Donations"}),
        };
        CHECK(cf1(run, gold, ontology, ontology.all_indices()) == 0.0);
    }

    SUBCASE("complement of gold scores 0 accuracy") {
        std::vector<RunRecord> run;
        for (const auto& record : gold) {
            RunRecord pred{record.tweet_id, record.event_id, {}, 0.1};
            for (const auto& type : ontology.types()) {
                if (std::find(record.info_types.begin(), record.info_types.end(), type.name) ==
                    record.info_types.end()) {
                    pred.info_types.push_back(type.name);
                }
            }
            run.push_back(std::move(pred));
        }
        CHECK(cacc(run, gold, ontology) == 0.0);
    }

    SUBCASE("all-negative run scores one minus pair prevalence") {
        std::vector<RunRecord> run;
        for (const auto& record : gold) {
            run.push_back(pred_of(record.tweet_id, record.event_id, 0.1));
        }
        // 4 gold-positive pairs out of 12
        CHECK(cacc(run, gold, ontology) == doctest::Approx(1.0 - 4.0 / 12.0).epsilon(1e-12));
    }

    SUBCASE("mixed confusion matches the brute-force oracle") {
        std::vector<RunRecord> run = {
            pred_of("a", "e", 0.1, {"Request-SearchAndRescue", "Report-Weather"}),
            pred_of("b", "e", 0.1, {"Report-Weather"}),
            pred_of("c", "e", 0.1),
            pred_of("d", "e", 0.1, {"CallToAction-Donations"}),
        };
        std::vector<std::string> all_names;
        for (const auto& type : ontology.types()) {
            all_names.push_back(type.name);
        }
        CHECK(cf1(run, gold, ontology, ontology.all_indices()) ==
              doctest::Approx(oracle::cf1(run, gold, all_names)).epsilon(1e-12));
        CHECK(cacc(run, gold, ontology) ==
              doctest::Approx(oracle::cacc(run, gold, all_names)).epsilon(1e-12));
    }
}

TEST_CASE("perr") {
    const auto& ontology = oracle::small_ontology();
    std::vector<GoldRecord> gold = {
        gold_of("a", "e", PriorityLevel::Critical, {"Request-SearchAndRescue"}),
        gold_of("b", "e", PriorityLevel::Low, {"Request-SearchAndRescue"}),
        gold_of("c", "e", PriorityLevel::Medium, {"CallToAction-Donations"}),
    };

    SUBCASE("exact level predictions score 1") {
        auto run = perfect_run(gold);
        CHECK(perr(run, gold, ontology, ontology.all_indices()) == 1.0);
    }

    SUBCASE("uniformly wrong class scores 0") {
        // gold levels are Critical/Low/Medium; predict High everywhere
        std::vector<RunRecord> run = {
            pred_of("a", "e", 0.75, {"Request-SearchAndRescue"}),
            pred_of("b", "e", 0.75, {"Request-SearchAndRescue"}),
            pred_of("c", "e", 0.75, {"CallToAction-Donations"}),
        };
        CHECK(perr(run, gold, ontology, ontology.all_indices()) == 0.0);
    }

    SUBCASE("random instances match the brute-force oracle") {
        for (int trial = 0; trial < 50; ++trial) {
            auto instance = oracle::random_instance(7000 + trial);
            std::vector<std::string> all_names;
            for (const auto& type : ontology.types()) {
                all_names.push_back(type.name);
            }
            CHECK(perr(instance.run, instance.gold, ontology, ontology.all_indices()) ==
                  doctest::Approx(oracle::perr(instance.run, instance.gold, all_names))
                      .epsilon(1e-12));
        }
    }
}

TEST_CASE("harmonic mean reproduces published summary rows") {
    SUBCASE("ensemble row") {
        MetricReport report;
        report.ndcg = 0.5176;
        report.aw_hc = -0.1613;
        report.aw_a = -0.1148;
        report.perr_h = 0.2594;
        report.perr_a = 0.2966;
        report.cf1_h = 0.1754;
        report.cf1_a = 0.2084;
        report.cacc = 0.8545;
        CHECK(std::abs(harm(report) - 0.3141) <= 0.0005);
    }
    SUBCASE("single-model row") {
        MetricReport report;
        report.ndcg = 0.5101;
        report.aw_hc = -0.2689;
        report.aw_a = -0.1569;
        report.perr_h = 0.1923;
        report.perr_a = 0.2544;
        report.cf1_h = 0.1382;
        report.cf1_a = 0.1638;
        report.cacc = 0.8937;
        CHECK(std::abs(harm(report) - 0.2609) <= 0.0005);
    }
    SUBCASE("equal constituents return the common value") {
        MetricReport report;
        report.ndcg = report.perr_h = report.perr_a = report.cf1_h = report.cf1_a = report.cacc =
            0.37;
        report.aw_hc = report.aw_a = 2.0 * 0.37 - 1.0;  // normalizes back to 0.37
        CHECK(harm(report) == doctest::Approx(0.37).epsilon(1e-12));
    }
    SUBCASE("any zero constituent collapses to 0") {
        MetricReport report;
        report.ndcg = 0.5;
        report.aw_hc = report.aw_a = 0.0;
        report.perr_h = report.perr_a = 0.5;
        report.cf1_h = 0.0;  // zero after normalization
        report.cf1_a = 0.5;
        report.cacc = 0.5;
        CHECK(harm(report) == 0.0);
    }
}

TEST_CASE("wilson interval") {
    SUBCASE("certain successes reach exactly 1") {
        auto [lower, upper] = wilson_interval(10, 10);
        CHECK(upper == 1.0);
        CHECK(lower > 0.6);
        CHECK(lower < 0.8);
    }
    SUBCASE("half successes are symmetric about one half") {
        auto [lower, upper] = wilson_interval(50, 100);
        CHECK(lower + upper == doctest::Approx(1.0).epsilon(1e-12));
    }
    SUBCASE("zero successes mirror full successes") {
        auto none = wilson_interval(0, 25);
        auto full = wilson_interval(25, 25);
        CHECK(none.first == 0.0);
        CHECK(none.second == doctest::Approx(1.0 - full.first).epsilon(1e-12));
    }
    SUBCASE("invalid inputs") {
        CHECK_THROWS_AS(wilson_interval(1, 0), std::domain_error);
        CHECK_THROWS_AS(wilson_interval(5, 4), std::domain_error);
    }
    SUBCASE("non-overlap flags a confident difference") {
        CHECK(confident_difference({0.1, 0.3}, {0.4, 0.6}));
        CHECK(confident_difference({0.4, 0.6}, {0.1, 0.3}));
        CHECK_FALSE(confident_difference({0.1, 0.5}, {0.4, 0.6}));
    }
}

TEST_CASE("evaluate_all") {
    const auto& ontology = oracle::small_ontology();

    SUBCASE("perfection on an all-important gold set") {
        std::vector<GoldRecord> gold = {
            gold_of("a", "e1", PriorityLevel::Critical, {"Request-SearchAndRescue"}),
            gold_of("b", "e1", PriorityLevel::High, {"Report-Weather"}),
            gold_of("c", "e2", PriorityLevel::Critical,
                    {"CallToAction-Donations", "Request-SearchAndRescue"}),
            gold_of("d", "e2", PriorityLevel::High, {"Report-Weather"}),
        };
        auto run = perfect_run(gold);
        MetricReport report = evaluate_all(run, gold, ontology);
        CHECK(report.ndcg == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(report.aw_hc == 1.0);
        CHECK(report.aw_a == 1.0);
        CHECK(report.cf1_h == 1.0);
        CHECK(report.cf1_a == 1.0);
        CHECK(report.cacc == 1.0);
        CHECK(report.perr_h == 1.0);
        CHECK(report.perr_a == 1.0);
        CHECK(report.harm == doctest::Approx(1.0).epsilon(1e-12));
    }

    SUBCASE("empty predictions annihilate the harmonic mean") {
        std::vector<GoldRecord> gold = {
            gold_of("a", "e1", PriorityLevel::Critical, {"Request-SearchAndRescue"}),
            gold_of("b", "e1", PriorityLevel::Low, {"Report-Weather"}),
        };
        std::vector<RunRecord> run = {pred_of("a", "e1", 0.0), pred_of("b", "e1", 0.0)};
        MetricReport report = evaluate_all(run, gold, ontology);
        CHECK(report.cf1_a == 0.0);
        CHECK(report.harm == 0.0);
    }

    SUBCASE("strict coverage and the lenient fill") {
        std::vector<GoldRecord> gold = {
            gold_of("a", "e1", PriorityLevel::Critical, {"Request-SearchAndRescue"}),
            gold_of("missing", "e1", PriorityLevel::Low),
        };
        std::vector<RunRecord> run = {pred_of("a", "e1", 1.0, {"Request-SearchAndRescue"})};
        CHECK_THROWS_WITH_AS(evaluate_all(run, gold, ontology), doctest::Contains("missing"),
                             ValidationError);
        EvalOptions lenient;
        lenient.lenient = true;
        MetricReport report = evaluate_all(run, gold, ontology, lenient);
        CHECK(report.cf1_a == 1.0);
    }

    SUBCASE("input order never matters") {
        auto instance = oracle::random_instance(123);
        MetricReport base = evaluate_all(instance.run, instance.gold, ontology);

        auto shuffled_run = instance.run;
        std::reverse(shuffled_run.begin(), shuffled_run.end());
        MetricReport shuffled = evaluate_all(shuffled_run, instance.gold, ontology);
        CHECK(base.ndcg == shuffled.ndcg);
        CHECK(base.aw_hc == shuffled.aw_hc);
        CHECK(base.aw_a == shuffled.aw_a);
        CHECK(base.cf1_a == shuffled.cf1_a);
        CHECK(base.harm == shuffled.harm);
    }

    SUBCASE("matches the brute-force oracle on random instances") {
        for (int trial = 0; trial < 100; ++trial) {
            auto instance = oracle::random_instance(4242 + trial);
            MetricReport actual = evaluate_all(instance.run, instance.gold, ontology);
            MetricReport expected =
                oracle::evaluate_all(instance.run, instance.gold, ontology, 100);
            CHECK(std::abs(actual.ndcg - expected.ndcg) < 1e-9);
            CHECK(std::abs(actual.aw_hc - expected.aw_hc) < 1e-9);
            CHECK(std::abs(actual.aw_a - expected.aw_a) < 1e-9);
            CHECK(std::abs(actual.cf1_h - expected.cf1_h) < 1e-9);
            CHECK(std::abs(actual.cf1_a - expected.cf1_a) < 1e-9);
            CHECK(std::abs(actual.cacc - expected.cacc) < 1e-9);
            CHECK(std::abs(actual.perr_h - expected.perr_h) < 1e-9);
            CHECK(std::abs(actual.perr_a - expected.perr_a) < 1e-9);
            CHECK(std::abs(actual.harm - expected.harm) < 1e-9);
        }
    }

    SUBCASE("metric ranges hold on random instances") {
        for (int trial = 0; trial < 100; ++trial) {
            auto instance = oracle::random_instance(31000 + trial);
            MetricReport report = evaluate_all(instance.run, instance.gold, ontology);
            for (double value : {report.ndcg, report.cf1_h, report.cf1_a, report.cacc,
                                 report.perr_h, report.perr_a, report.harm}) {
                CHECK(value >= 0.0);
                CHECK(value <= 1.0);
            }
            CHECK(report.aw_hc >= -1.0);
            CHECK(report.aw_hc <= 1.0);
            CHECK(report.aw_a >= -1.0);
            CHECK(report.aw_a <= 1.0);
        }
    }
}

TEST_CASE("per-event breakdown") {
    const auto& ontology = oracle::small_ontology();
    std::vector<GoldRecord> gold = {
        gold_of("a", "beta", PriorityLevel::Critical, {"Report-Weather"}),
        gold_of("b", "alpha", PriorityLevel::High, {"Report-Weather"}),
    };
    auto run = perfect_run(gold);
    auto reports = evaluate_per_event(run, gold, ontology);
    REQUIRE(reports.size() == 2);
    CHECK(reports[0].first == "alpha");
    CHECK(reports[1].first == "beta");
    CHECK(reports[0].second.cf1_a == 1.0);
}
