#include <doctest.h>

#include <cmath>
#include <map>

#include <json.hpp>

#include "genclass/corpus.hpp"
#include "genclass/errors.hpp"
#include "genclass/inference.hpp"
#include "genclass/mock_backend.hpp"
#include "genclass/rng.hpp"
#include "test_helpers.hpp"

using namespace genclass;

TEST_SUITE("inference") {

TEST_CASE("parse_category text mode") {
  auto schema = test_helpers::ec_schema();
  CHECK(*parse_category("Category: love", schema, ParseMode::CategoryText) == "love");
  CHECK(*parse_category("Category:  anger  ", schema, ParseMode::CategoryText) ==
        "anger");
  CHECK(!parse_category("The answer is love", schema, ParseMode::CategoryText));
  CHECK(!parse_category("category: love", schema, ParseMode::CategoryText));
  CHECK(!parse_category("", schema, ParseMode::CategoryText));
  CHECK(!parse_category("Category: serenity", schema, ParseMode::CategoryText));

  SUBCASE("only the first matching line counts") {
    CHECK(*parse_category("Category: joy\nCategory: anger", schema,
                          ParseMode::CategoryText) == "joy");
    CHECK(!parse_category("Category: nonsense\nCategory: anger", schema,
                          ParseMode::CategoryText));
  }
  SUBCASE("a matching line later in the output is found") {
    CHECK(*parse_category("Let me think.\nCategory: fear", schema,
                          ParseMode::CategoryText) == "fear");
  }
  SUBCASE("chatter around the prefix is a format failure") {
    CHECK(!parse_category("I say Category: fear", schema, ParseMode::CategoryText));
  }
  SUBCASE("uncertain is a failure at inference, accepted when allowed") {
    CHECK(!parse_category("Category: uncertain", schema, ParseMode::CategoryText));
    CHECK(*parse_category("Category: uncertain", schema, ParseMode::CategoryText, {},
                          /*allow_uncertain=*/true) == "uncertain");
  }
  SUBCASE("case folding is opt-in") {
    MatchConfig fold;
    fold.case_fold = true;
    CHECK(!parse_category("Category: LOVE", schema, ParseMode::CategoryText));
    CHECK(*parse_category("Category: LOVE", schema, ParseMode::CategoryText, fold) ==
          "love");
  }
}

TEST_CASE("parse_category numeric mode") {
  auto schema = test_helpers::ec_schema();
  CHECK(*parse_category("Category: 3", schema, ParseMode::CategoryNumeric) == "anger");
  CHECK(*parse_category("Category: 0", schema, ParseMode::CategoryNumeric) ==
        "sadness");
  CHECK(!parse_category("Category: 6", schema, ParseMode::CategoryNumeric));
  CHECK(!parse_category("Category: -1", schema, ParseMode::CategoryNumeric));
  CHECK(!parse_category("Category: 3.5", schema, ParseMode::CategoryNumeric));
  CHECK(!parse_category("Category: three", schema, ParseMode::CategoryNumeric));
  CHECK(!parse_category("Category: anger", schema, ParseMode::CategoryNumeric));
}

TEST_CASE("parse_tagged canonical order") {
  auto parts = parse_tagged("<reason>edit adds detail</reason> <answer>elaboration</answer>");
  REQUIRE(parts.has_value());
  CHECK(parts->reason == "edit adds detail");
  CHECK(parts->answer == "elaboration");
  CHECK(!parts->think);

  CHECK(!parse_tagged("<answer>x</answer><reason>y</reason>"));   // wrong order
  CHECK(!parse_tagged("<reason>a</reason><answer>b"));            // unclosed
  CHECK(!parse_tagged("<reason>a</reason>"));                     // missing answer
  CHECK(!parse_tagged("say <reason>a</reason> <answer>b</answer>"));  // extra text
  CHECK(!parse_tagged("<reason>a</reason> <answer>b</answer> tail"));
  CHECK(!parse_tagged("<reason>a</reason><reason>c</reason><answer>b</answer>"));
  CHECK(!parse_tagged(""));
  CHECK(parse_tagged("  <reason>a</reason>\n<answer>b</answer>  "));
  // A stray think block does not belong to the two-part layout.
  CHECK(!parse_tagged("<think>t</think><reason>a</reason><answer>b</answer>"));
}

TEST_CASE("parse_tagged honors the expected order") {
  auto cr = parse_tagged("<answer>b</answer> <reason>a</reason>",
                         ReasonOrder::ClassThenReason);
  REQUIRE(cr.has_value());
  CHECK(cr->answer == "b");
  CHECK(cr->reason == "a");

  auto trc = parse_tagged("<think>t</think> <reason>a</reason> <answer>b</answer>",
                          ReasonOrder::ThinkReasonClass);
  REQUIRE(trc.has_value());
  CHECK(*trc->think == "t");

  CHECK(!parse_tagged("<reason>a</reason> <answer>b</answer>",
                      ReasonOrder::ClassThenReason));
  CHECK(!parse_tagged("<reason>a</reason> <answer>b</answer>",
                      ReasonOrder::ThinkReasonClass));
}

TEST_CASE("parse_direct accepts both configured surfaces") {
  auto schema = test_helpers::ec_schema();
  CHECK(*parse_direct("anger", schema) == "anger");
  CHECK(*parse_direct("  anger \n", schema) == "anger");
  CHECK(*parse_direct("Category: anger", schema) == "anger");
  CHECK(!parse_direct("the label is anger", schema));
  CHECK(!parse_direct("angered", schema));

  MatchConfig no_bare;
  no_bare.direct_accept_bare = false;
  CHECK(!parse_direct("anger", schema, no_bare));
  CHECK(*parse_direct("Category: anger", schema, no_bare) == "anger");

  MatchConfig no_line;
  no_line.direct_accept_category_line = false;
  CHECK(!parse_direct("Category: anger", schema, no_line));
}

TEST_CASE("classify_generate composes generation and parsing") {
  auto schema = test_helpers::ec_schema();
  MockBackend mock = MockBackend::from_json_text(R"({
    "rules": [
      {"if_contains": "first", "reply": "Category: joy",
       "reply_logprobs": [-0.5, -0.1]},
      {"if_contains": "second", "reply": "i have no idea"}
    ],
    "default_reply": "Category: anger"
  })");

  PromptRecord prompt;
  prompt.strategy = StrategyId::zero_shot();
  prompt.expected_parse_mode = ParseMode::CategoryText;
  prompt.target_example_id = "t1";

  SUBCASE("well-formed reply") {
    prompt.text = "first prompt";
    Prediction p = classify_generate(mock, prompt, schema, DecodeParams{});
    CHECK(p.format_ok);
    CHECK(*p.parsed_label == "joy");
    CHECK(p.example_id == "t1");
    // Only the "joy" token aligns with the label surface.
    CHECK(*p.confidence == doctest::Approx(-0.1));
  }
  SUBCASE("free text is an in-band format failure") {
    prompt.text = "second prompt";
    Prediction p = classify_generate(mock, prompt, schema, DecodeParams{});
    CHECK(!p.format_ok);
    CHECK(!p.parsed_label);
    CHECK(p.raw_output == "i have no idea");
  }
  SUBCASE("tagged mode round-trips reasoning-corpus targets") {
    auto records = build_reasoning_corpus(
        {{"t1", std::nullopt, "the edit adds detail", "love"}},
        ReasonOrder::ReasonThenClass, schema);
    nlohmann::json script;
    script["default_reply"] = records[0].target;
    MockBackend tagged_mock = MockBackend::from_json_text(script.dump());
    prompt.text = "whatever";
    prompt.expected_parse_mode = ParseMode::TaggedReasoning;
    Prediction p = classify_generate(tagged_mock, prompt, schema, DecodeParams{});
    CHECK(p.format_ok);
    CHECK(*p.parsed_label == "love");
  }
}

TEST_CASE("compute_ppl") {
  CHECK(compute_ppl({std::log(0.5)}) == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(compute_ppl({-1.0, -3.0}) ==
        doctest::Approx(std::exp(2.0)).epsilon(1e-9));
  CHECK(compute_ppl({0.0, 0.0}) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK_THROWS_AS(compute_ppl({}), Error);
}

namespace {

// Script with one scored entry per EC label.
MockBackend scripted_ppl_backend(const std::map<std::string, std::vector<double>>& by_label) {
  nlohmann::json rule;
  rule["if_contains"] = "";
  nlohmann::json logprobs;
  for (const auto& [label, values] : by_label) logprobs[label] = values;
  rule["logprobs"] = logprobs;
  nlohmann::json script;
  script["rules"] = nlohmann::json::array({rule});
  script["default_reply"] = "x";
  return MockBackend::from_json_text(script.dump());
}

}  // namespace

TEST_CASE("classify_ppl picks the lowest perplexity label") {
  auto schema = test_helpers::ec_schema();
  MockBackend mock = scripted_ppl_backend({
      {"sadness", {-2.0}}, {"joy", {-0.2}}, {"love", {-2.0}},
      {"anger", {-2.0}}, {"fear", {-2.0}}, {"surprise", {-2.0}},
  });
  Prediction p = classify_ppl(mock, "base prompt", schema, "e1");
  CHECK(p.format_ok);
  CHECK(*p.parsed_label == "joy");
  CHECK(p.example_id == "e1");
  CHECK(*p.confidence == doctest::Approx(-0.2));
}

TEST_CASE("classify_ppl ties break to the earliest schema label") {
  auto schema = test_helpers::ec_schema();
  MockBackend mock = scripted_ppl_backend({
      {"sadness", {-1.0}}, {"joy", {-1.0}}, {"love", {-1.0}},
      {"anger", {-1.0}}, {"fear", {-1.0}}, {"surprise", {-1.0}},
  });
  Prediction p = classify_ppl(mock, "base", schema, "e1");
  CHECK(*p.parsed_label == "sadness");
}

TEST_CASE("classify_ppl matches a brute-force argmin oracle") {
  auto schema = test_helpers::ec_schema();
  SplitMix64 rng(31415);
  for (int trial = 0; trial < 300; ++trial) {
    std::map<std::string, std::vector<double>> by_label;
    for (const auto& label : schema.labels) {
      std::vector<double> values;
      size_t n = 1 + rng.bounded(6);
      for (size_t i = 0; i < n; ++i) values.push_back(-rng.uniform() * 5.0);
      by_label[label] = values;
    }
    MockBackend mock = scripted_ppl_backend(by_label);

    // Oracle: independent mean + exp scan in schema order.
    std::string best_label;
    double best_ppl = 0.0;
    for (const auto& label : schema.labels) {
      const auto& values = by_label[label];
      double sum = 0.0;
      for (double v : values) sum += v;
      double ppl = std::exp(-sum / static_cast<double>(values.size()));
      if (best_label.empty() || ppl < best_ppl) {
        best_label = label;
        best_ppl = ppl;
      }
    }

    Prediction p = classify_ppl(mock, "base", schema, "x");
    CHECK(*p.parsed_label == best_label);
  }
}

TEST_CASE("ppl monotonicity: a uniform negative shift on one candidate") {
  auto schema = test_helpers::ec_schema();
  std::map<std::string, std::vector<double>> base{
      {"sadness", {-1.0, -2.0}}, {"joy", {-0.5}}, {"love", {-1.5}},
      {"anger", {-0.7, -0.9}}, {"fear", {-2.5}}, {"surprise", {-1.1}},
  };
  MockBackend before = scripted_ppl_backend(base);
  auto scores_before = score_labels_ppl(before, "p", schema);

  auto shifted = base;
  for (auto& v : shifted["anger"]) v += -0.8;  // delta < 0
  MockBackend after = scripted_ppl_backend(shifted);
  auto scores_after = score_labels_ppl(after, "p", schema);

  REQUIRE(scores_before.size() == scores_after.size());
  for (size_t i = 0; i < scores_before.size(); ++i) {
    if (scores_before[i].label == "anger") {
      CHECK(scores_after[i].ppl > scores_before[i].ppl);
    } else {
      CHECK(scores_after[i].ppl == scores_before[i].ppl);
    }
  }
}

TEST_CASE("ppl argmin is invariant to token repetition at equal mean") {
  auto schema = test_helpers::ec_schema();
  std::map<std::string, std::vector<double>> single{
      {"sadness", {-1.2}}, {"joy", {-0.4}}, {"love", {-0.9}},
      {"anger", {-2.0}}, {"fear", {-1.7}}, {"surprise", {-0.6}},
  };
  std::map<std::string, std::vector<double>> repeated;
  for (const auto& [label, values] : single) {
    repeated[label] = {values[0], values[0], values[0]};
  }
  MockBackend a = scripted_ppl_backend(single);
  MockBackend b = scripted_ppl_backend(repeated);
  CHECK(*classify_ppl(a, "p", schema, "x").parsed_label ==
        *classify_ppl(b, "p", schema, "x").parsed_label);
}

TEST_CASE("scoring-incapable backends are rejected for ppl") {
  struct NoScoring : Backend {
    std::string id() const override { return "stub"; }
    GenerationResult generate(const std::string&, const DecodeParams&) override {
      return {};
    }
    bool supports_scoring() const override { return false; }
    std::vector<TokenLogprob> score_continuation(const std::string&,
                                                 const std::string&) override {
      throw Error(ErrorKind::ScoringUnsupported, "stub");
    }
  };
  NoScoring backend;
  auto schema = test_helpers::ec_schema();
  try {
    classify_ppl(backend, "p", schema, "x");
    FAIL("expected scoring-unsupported");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::ScoringUnsupported);
  }
}

TEST_CASE("round trip: targets parse back to gold for every strategy and label") {
  auto schema = test_helpers::ec_schema();
  std::vector<StrategyId> strategies = {
      StrategyId::zero_shot(),   StrategyId::n_shot(1),
      StrategyId::n_shot(3),     StrategyId::n_shot(5),
      StrategyId::fixed_3_shot(), StrategyId::similar_3_shot(),
      StrategyId::definition(),  StrategyId::definition_1_shot(),
      StrategyId::numerical(),   StrategyId::uncertainty(),
  };
  for (const auto& strategy : strategies) {
    for (const auto& label : schema.labels) {
      std::string target = render_sft_target_for_label(label, schema, strategy);
      auto parsed = parse_category(target, schema, strategy.parse_mode(), {},
                                   strategy.kind == StrategyKind::Uncertainty);
      REQUIRE(parsed.has_value());
      CHECK(*parsed == label);
    }
  }
  // The uncertainty strategy also round-trips the reserved label.
  std::string target =
      render_sft_target_for_label("uncertain", schema, StrategyId::uncertainty());
  CHECK(*parse_category(target, schema, ParseMode::CategoryText, {}, true) ==
        "uncertain");
}

}  // TEST_SUITE
