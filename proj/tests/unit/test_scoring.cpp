#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "aiq/error.hpp"
#include "aiq/scoring.hpp"
#include "builders.hpp"
#include "support.hpp"

using namespace aiq;
using namespace aiq::testing;

namespace {

ResponseRecord answered(const std::string& item_id, const std::string& text) {
  ResponseRecord r;
  r.item_id = item_id;
  r.raw_response = text;
  r.outcome = Outcome::Answered;
  return r;
}

double points_of(const ScoreOutcome& outcome) {
  REQUIRE(std::holds_alternative<ItemScore>(outcome));
  return std::get<ItemScore>(outcome).points;
}

// Complete session over `battery` with the given points per item id.
Session scored_session(const Battery& battery, const std::map<std::string, double>& points) {
  Session s;
  s.id = "s";
  s.subject_id = "subj";
  s.battery = {battery.id, battery.version};
  s.status = SessionStatus::Complete;
  for (const TestItem* item : battery.items_in_order()) {
    ItemScore score;
    score.item_id = item->id;
    score.points = points.at(item->id);
    s.item_scores[item->id] = score;
  }
  return s;
}

// Reference computation: ratio of points per ability, weighted sum.
double oracle_q(const Battery& b, const std::map<std::string, double>& points) {
  double q = 0.0;
  for (Ability a : kAbilities) {
    double earned = 0.0, attainable = 0.0;
    for (const Subtest& s : b.subtests) {
      if (s.ability != a) continue;
      for (const TestItem& item : s.items) {
        earned += points.at(item.id);
        attainable += item.max_points;
      }
    }
    q += b.weights[a] * 100.0 * earned / attainable;
  }
  return q;
}

bool word_byte(char c) {
  const auto u = static_cast<unsigned char>(c);
  return (u >= '0' && u <= '9') || (u >= 'a' && u <= 'z') || (u >= 'A' && u <= 'Z') || u >= 0x80;
}

// Keyword oracle: compare the normalised keyword against every substring of
// the normalised response, accepting those bounded by non-word bytes.
double oracle_keywords(const KeywordRubric& rubric, const std::string& response) {
  const std::string hay = normalize_text(response);
  double total = 0.0;
  for (const auto& [keyword, pts] : rubric.keywords) {
    const std::string needle = normalize_text(keyword);
    bool found = false;
    for (std::size_t i = 0; i < hay.size() && !found; ++i) {
      for (std::size_t j = i + 1; j <= hay.size() && !found; ++j) {
        const bool bounded = (i == 0 || !word_byte(hay[i - 1])) && (j == hay.size() || !word_byte(hay[j]));
        found = bounded && hay.compare(i, j - i, needle) == 0;
      }
    }
    if (found) total += pts;
  }
  return std::min(total, rubric.cap);
}

AbilityScores random_scores(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 100.0);
  return {u(rng), u(rng), u(rng), u(rng)};
}

WeightVector random_weights(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double w[4], sum = 0.0;
  for (double& x : w) sum += (x = u(rng));
  WeightVector v{w[0] / sum, w[1] / sum, w[2] / sum, 0.0};
  v.d = std::max(0.0, 1.0 - v.a - v.b - v.c);
  return v;
}

}  // namespace

TEST_SUITE("scoring") {
  TEST_CASE("exact match normalises whitespace and case") {
    const TestItem item = exact_item("q", "2+2", {"4", "four"}, 3.0);
    CHECK(points_of(score_item(item, answered("q", " Four "), {})) == 3.0);
    CHECK(points_of(score_item(item, answered("q", "FOUR\n"), {})) == 3.0);
    CHECK(points_of(score_item(item, answered("q", "five"), {})) == 0.0);
    CHECK(normalize_text("  A \t b\n\nC  ") == "a b c");
  }

  TEST_CASE("numeric answers respect the tolerance") {
    const TestItem item{"pi", {Modality::Text, "pi?"}, 2.0, NumericAnswer{3.14, 0.01}};
    CHECK(points_of(score_item(item, answered("pi", "3.1415"), {})) == 2.0);
    const TestItem tight{"pi", {Modality::Text, "pi?"}, 2.0, NumericAnswer{3.14, 0.001}};
    CHECK(points_of(score_item(tight, answered("pi", "3.1415"), {})) == 0.0);
    CHECK(points_of(score_item(item, answered("pi", " +3.14 "), {})) == 2.0);
    CHECK(points_of(score_item(item, answered("pi", "3.14 metres"), {})) == 0.0);
    CHECK(points_of(score_item(item, answered("pi", "nan"), {})) == 0.0);
  }

  TEST_CASE("keyword rubric sums matched keywords up to the cap") {
    const KeywordRubric rubric{{{"gravity", 2.0}, {"mass", 1.0}}, 2.0};
    const TestItem item{"k", {Modality::Text, "why?"}, 2.0, rubric};
    CHECK(points_of(score_item(item, answered("k", "Gravity depends on mass"), {})) == 2.0);
    CHECK(keyword_points(rubric, "mass only") == 1.0);
    CHECK(keyword_points(rubric, "massive gravitation") == 0.0);
    CHECK(keyword_points(rubric, "mass, mass, mass") == 1.0);
  }

  TEST_CASE("keyword scoring agrees with a brute-force substring oracle") {
    const std::vector<std::string> vocab = {"red", "green", "blue", "sky", "deep", "café", "x1", "sea"};
    std::mt19937_64 rng(99);
    std::uniform_int_distribution<std::size_t> pick(0, vocab.size() - 1);
    std::uniform_int_distribution<int> len(0, 8);
    const std::vector<std::string> seps = {" ", "  ", ", ", ".", "-", "\t", "!"};
    std::uniform_int_distribution<std::size_t> sep(0, seps.size() - 1);
    for (int trial = 0; trial < 2000; ++trial) {
      KeywordRubric rubric;
      rubric.cap = 1.0 + static_cast<double>(len(rng));
      const int nk = 1 + len(rng) % 3;
      for (int k = 0; k < nk; ++k) {
        std::string kw = vocab[pick(rng)];
        if (len(rng) % 3 == 0) kw += " " + vocab[pick(rng)];
        rubric.keywords[kw] = 1.0 + static_cast<double>(len(rng) % 2);
      }
      std::string response;
      const int n = len(rng);
      for (int w = 0; w < n; ++w) {
        response += vocab[pick(rng)];
        if (len(rng) % 5 == 0) response += "s";  // near-miss suffix
        response += seps[sep(rng)];
      }
      INFO("response: " << response);
      REQUIRE(keyword_points(rubric, response) == oracle_keywords(rubric, response));
    }
  }

  TEST_CASE("human rubric items are left pending") {
    const TestItem item = rubric_item("h", "write a poem");
    const ScoreOutcome outcome = score_item(item, answered("h", "roses"), {});
    REQUIRE(std::holds_alternative<PendingHumanGrade>(outcome));
    CHECK(std::get<PendingHumanGrade>(outcome).item_id == "h");
  }

  TEST_CASE("non-answers score zero and are marked auto_zero") {
    for (Outcome o : {Outcome::Timeout, Outcome::TransportError, Outcome::Refused}) {
      for (const TestItem& item : {exact_item("q", "p", {"a"}), rubric_item("q", "p")}) {
        ResponseRecord r{"q", "", Millis{5}, o, "", {}};
        const ScoreOutcome outcome = score_item(item, r, epoch_2016());
        REQUIRE(std::holds_alternative<ItemScore>(outcome));
        const ItemScore& s = std::get<ItemScore>(outcome);
        CHECK(s.points == 0.0);
        CHECK(s.auto_zero);
        CHECK(s.method == ScoreMethod::Auto);
        CHECK(s.scored_at == epoch_2016());
      }
    }
  }

  TEST_CASE("a response for a different item is rejected") {
    CHECK_THROWS_WITH_AS(score_item(exact_item("a", "p", {"x"}), answered("b", "x"), {}),
                         doctest::Contains("ItemResponseMismatch"), Error);
  }

  TEST_CASE("ability score is the ratio of earned to attainable points") {
    Battery b = simple_battery(1);
    // Mastery: 40 attainable points over 4 items, 25 earned.
    b.subtests[2] = subtest("Mastery", Ability::Mastery,
                            {exact_item("m1", "p", {"a"}, 10), exact_item("m2", "p", {"a"}, 10),
                             exact_item("m3", "p", {"a"}, 10), exact_item("m4", "p", {"a"}, 10)});
    const Session s = scored_session(b, {{"I1", 1}, {"O1", 0}, {"m1", 10}, {"m2", 10}, {"m3", 5}, {"m4", 0}, {"C1", 1}});
    const AbilityScores scores = ability_scores(s, b);
    CHECK(scores.f_S == 62.5);
    CHECK(scores.f_I == 100.0);
    CHECK(scores.f_O == 0.0);
  }

  TEST_CASE("incomplete sessions cannot be scored") {
    const Battery b = simple_battery(1);
    Session s = scored_session(b, {{"I1", 1}, {"O1", 1}, {"S1", 1}, {"C1", 1}});
    s.status = SessionStatus::AwaitingGrades;
    CHECK_THROWS_WITH_AS(ability_scores(s, b), doctest::Contains("SessionIncomplete"), Error);
    s.status = SessionStatus::Complete;
    s.item_scores.erase("C1");
    CHECK_THROWS_AS(ability_scores(s, b), Error);
    const auto partial = partial_ability_scores(s, b);
    CHECK(partial[0] == 100.0);
    CHECK_FALSE(partial[3].has_value());
  }

  TEST_CASE("IQ examples") {
    CHECK(compute_iq({40, 40, 40, 40}, {}).q_text() == "40.00");
    CHECK(compute_iq({100, 100, 100, 100}, {}).q_text() == "100.00");
    CHECK(compute_iq({73, 12, 99, 5}, {1, 0, 0, 0}).q_text() == "73.00");
    CHECK(compute_iq({0, 0, 0, 0}, {}).q_text() == "0.00");
    CHECK(compute_iq({10, 20, 30, 40}, {0.1, 0.2, 0.3, 0.4}).q_text() == "30.00");
  }

  TEST_CASE("invalid weights and scores are rejected") {
    CHECK_THROWS_WITH_AS(compute_iq({1, 1, 1, 1}, {0.5, 0.5, 0.5, 0}), doctest::Contains("InvalidWeights"), Error);
    CHECK_THROWS_WITH_AS(compute_iq({1, 1, 1, 1}, {1.5, -0.5, 0, 0}), doctest::Contains("InvalidWeights"), Error);
    CHECK_THROWS_WITH_AS(compute_iq({101, 1, 1, 1}, {}), doctest::Contains("OutOfRange"), Error);
  }

  TEST_CASE("display rounding is half-up to cents") {
    CHECK(round_half_up_cents(47.28) == 4728);
    CHECK(round_half_up_cents(0.125) == 13);
    CHECK(round_half_up_cents(26.5) == 2650);
    CHECK(round_half_up_cents(99.995) == 10000);
    CHECK(format_cents(4728) == "47.28");
    CHECK(format_cents(5) == "0.05");
    CHECK(format_cents(10000) == "100.00");
  }

  TEST_CASE("Q is linear in each ability score") {
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> u(0.0, 100.0);
    for (int trial = 0; trial < 1000; ++trial) {
      const WeightVector w = random_weights(rng);
      const AbilityScores s = random_scores(rng);
      const double base = compute_iq(s, w).q_raw;
      for (Ability a : kAbilities) {
        AbilityScores t = s;
        t[a] = u(rng);
        const double moved = compute_iq(t, w).q_raw;
        REQUIRE(moved - base == doctest::Approx(w[a] * (t[a] - s[a])).epsilon(1e-9).scale(100));
      }
    }
  }

  TEST_CASE("Q stays within the bounds of its ability scores") {
    std::mt19937_64 rng(2);
    for (int trial = 0; trial < 2000; ++trial) {
      const WeightVector w = random_weights(rng);
      const AbilityScores s = random_scores(rng);
      const double q = compute_iq(s, w).q_raw;
      const double lo = std::min({s.f_I, s.f_O, s.f_S, s.f_C});
      const double hi = std::max({s.f_I, s.f_O, s.f_S, s.f_C});
      REQUIRE(q >= lo - 1e-9);
      REQUIRE(q <= hi + 1e-9);
      REQUIRE(q >= 0.0);
      REQUIRE(q <= 100.0 + 1e-9);
    }
  }

  TEST_CASE("equal weights make Q symmetric in the abilities") {
    std::mt19937_64 rng(3);
    for (int trial = 0; trial < 500; ++trial) {
      AbilityScores s = random_scores(rng);
      std::array<double, 4> v{s.f_I, s.f_O, s.f_S, s.f_C};
      const double q = compute_iq(s, {}).q_raw;
      std::shuffle(v.begin(), v.end(), rng);
      REQUIRE(compute_iq({v[0], v[1], v[2], v[3]}, {}).q_raw == doctest::Approx(q).epsilon(1e-12));
    }
  }

  TEST_CASE("raising one item's points never lowers Q") {
    std::mt19937_64 rng(4);
    for (int trial = 0; trial < 200; ++trial) {
      const Battery b = random_battery(rng);
      std::map<std::string, double> pts;
      for (const TestItem* item : b.items_in_order()) {
        pts[item->id] = std::uniform_real_distribution<double>(0.0, item->max_points)(rng);
      }
      const double before = session_iq(scored_session(b, pts), b, {}).q_raw;
      const auto items = b.items_in_order();
      const TestItem* item = items[std::uniform_int_distribution<std::size_t>(0, items.size() - 1)(rng)];
      pts[item->id] = std::uniform_real_distribution<double>(pts[item->id], item->max_points)(rng);
      REQUIRE(session_iq(scored_session(b, pts), b, {}).q_raw >= before - 1e-12);
    }
  }

  TEST_CASE("scaling all max points and earned points leaves Q unchanged") {
    std::mt19937_64 rng(5);
    for (int trial = 0; trial < 200; ++trial) {
      const Battery b = random_battery(rng);
      std::map<std::string, double> pts;
      for (const TestItem* item : b.items_in_order()) {
        pts[item->id] = std::uniform_real_distribution<double>(0.0, item->max_points)(rng);
      }
      const double k = std::uniform_real_distribution<double>(0.1, 10.0)(rng);
      Battery scaled = b;
      std::map<std::string, double> scaled_pts;
      for (Subtest& s : scaled.subtests) {
        s.max_points *= k;
        for (TestItem& item : s.items) {
          item.max_points *= k;
          scaled_pts[item.id] = pts[item.id] * k;
        }
      }
      REQUIRE(session_iq(scored_session(scaled, scaled_pts), scaled, {}).q_raw ==
              doctest::Approx(session_iq(scored_session(b, pts), b, {}).q_raw).epsilon(1e-9));
    }
  }

  TEST_CASE("session IQ matches a brute-force oracle within 1e-9") {
    std::mt19937_64 rng(6);
    for (int trial = 0; trial < 1000; ++trial) {
      const Battery b = random_battery(rng);
      std::map<std::string, double> pts;
      for (const TestItem* item : b.items_in_order()) {
        pts[item->id] = std::uniform_int_distribution<int>(0, static_cast<int>(item->max_points))(rng);
      }
      const IQResult r = session_iq(scored_session(b, pts), b, epoch_2016());
      REQUIRE(std::fabs(r.q_raw - oracle_q(b, pts)) <= 1e-9);
      REQUIRE(r.q_cents == static_cast<std::int64_t>(std::floor(oracle_q(b, pts) * 100.0 + 0.5 + 1e-9)));
      REQUIRE(r.subject_id == "subj");
      REQUIRE(r.computed_at == epoch_2016());
    }
  }

  TEST_CASE("IQ results round-trip through JSON and render as CSV") {
    IQResult r = compute_iq({62.5, 40, 10, 0}, {}, epoch_2016());
    r.subject_id = "bot";
    r.session_id = "bot-1";
    CHECK(iq_result_from_json(to_json(r), "r") == r);
    const IQResult imported = imported_result("google", 26.5, epoch_2016());
    CHECK(iq_result_from_json(to_json(imported), "r") == imported);
    const std::string csv = results_csv({r, imported});
    CHECK(csv.rfind("subject_id,Q,f_I,f_O,f_S,f_C,computed_at\r\n", 0) == 0);
    CHECK(csv.find("bot,28.13,62.50,40.00,10.00,0.00,2016-02-01T00:00:00.000Z\r\n") != std::string::npos);
    CHECK(csv.find("google,26.50,,,,,") != std::string::npos);
  }
}
