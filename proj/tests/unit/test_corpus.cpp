#include <doctest.h>

#include <algorithm>
#include <filesystem>
#include <map>
#include <set>

#include "genclass/corpus.hpp"
#include "genclass/errors.hpp"
#include "genclass/inference.hpp"
#include "genclass/io.hpp"
#include "genclass/rng.hpp"
#include "genclass/util.hpp"
#include "test_helpers.hpp"

using namespace genclass;
using test_helpers::make_example;

namespace {

Dataset sentiment_train(size_t n) {
  auto schema = test_helpers::ec_schema();
  Dataset train;
  train.name = "train";
  for (size_t i = 0; i < n; ++i) {
    train.examples.push_back(make_example(
        "ex" + std::to_string(i),
        "unique sentence marker " + std::to_string(i) + " end",
        schema.labels[i % schema.labels.size()]));
  }
  return train;
}

Prediction pred(const std::string& id, const std::string& label, double confidence) {
  Prediction p;
  p.example_id = id;
  p.raw_output = "Category: " + label;
  p.format_ok = true;
  p.parsed_label = label;
  p.confidence = confidence;
  return p;
}

TrainingRecord sized_record(const std::string& id, size_t length) {
  TrainingRecord r;
  r.example_id = id;
  r.strategy = "zero_shot";
  r.prompt = "p";
  r.target = "t";
  r.token_length = length;
  return r;
}

}  // namespace

TEST_SUITE("corpus") {

TEST_CASE("zero-shot corpus: one shot-free record per example") {
  auto schema = test_helpers::ec_schema();
  auto templates = test_helpers::ec_templates();
  Dataset train = sentiment_train(100);

  auto records = build_sft_corpus(train, schema, StrategyId::zero_shot(), 5, templates);
  REQUIRE(records.size() == 100);
  for (const auto& r : records) {
    CHECK(r.prompt.find("Example 1:") == std::string::npos);
    CHECK(r.strategy == "zero_shot");
    CHECK(r.target.starts_with("Category: "));
  }
}

TEST_CASE("n-shot corpus never leaks the target example into its own shots") {
  auto schema = test_helpers::ec_schema();
  auto templates = test_helpers::ec_templates();
  Dataset train = sentiment_train(100);

  auto records =
      build_sft_corpus(train, schema, StrategyId::n_shot(3), 1234, templates);
  REQUIRE(records.size() == 100);
  for (size_t i = 0; i < records.size(); ++i) {
    // The target text may appear once (the current case), never as a shot.
    const std::string& own_text = train.examples[i].slots.at("text");
    size_t first = records[i].prompt.find(own_text);
    REQUIRE(first != std::string::npos);
    CHECK(records[i].prompt.find(own_text, first + 1) == std::string::npos);
    CHECK(records[i].prompt.find("Example 3:") != std::string::npos);
  }
}

TEST_CASE("fixed-3-shot corpus repeats one identical example block") {
  auto schema = test_helpers::ec_schema();
  auto templates = test_helpers::ec_templates();
  Dataset train = sentiment_train(100);

  auto records =
      build_sft_corpus(train, schema, StrategyId::fixed_3_shot(), 9, templates);
  REQUIRE(records.size() == 100);

  // Extract the shots region (between the format line and the current case).
  auto block_of = [](const std::string& prompt) {
    size_t begin = prompt.find("Example 1:");
    size_t end = prompt.find("Current case:");
    REQUIRE(begin != std::string::npos);
    REQUIRE(end != std::string::npos);
    return prompt.substr(begin, end - begin);
  };
  std::string first_block = block_of(records[0].prompt);
  for (const auto& r : records) CHECK(block_of(r.prompt) == first_block);

  SUBCASE("explicit fixed ids are honored") {
    CorpusOptions options;
    options.fixed_shot_ids = {"ex7", "ex3", "ex5"};
    auto explicit_records = build_sft_corpus(train, schema, StrategyId::fixed_3_shot(),
                                             9, templates, options);
    CHECK(explicit_records[0].prompt.find("unique sentence marker 7 end") !=
          std::string::npos);
  }
}

TEST_CASE("similar-3-shot corpus retrieves neighbours with self-exclusion") {
  auto schema = test_helpers::ec_schema();
  auto templates = test_helpers::ec_templates();
  Dataset train = sentiment_train(10);

  EmbeddingStore store(3);
  SplitMix64 rng(3);
  for (size_t i = 0; i < 10; ++i) {
    store.add("ex" + std::to_string(i),
              {rng.uniform(), rng.uniform(), rng.uniform()});
  }
  CorpusOptions options;
  options.embeddings = &store;

  auto records = build_sft_corpus(train, schema, StrategyId::similar_3_shot(), 0,
                                  templates, options);
  REQUIRE(records.size() == 10);
  for (size_t i = 0; i < records.size(); ++i) {
    const std::string& own_text = train.examples[i].slots.at("text");
    size_t first = records[i].prompt.find(own_text);
    CHECK(records[i].prompt.find(own_text, first + 1) == std::string::npos);
  }

  SUBCASE("missing store is a config error") {
    CHECK_THROWS_AS(
        build_sft_corpus(train, schema, StrategyId::similar_3_shot(), 0, templates),
        Error);
  }
}

TEST_CASE("uncertainty corpus renders targets for relabeled golds") {
  auto schema = test_helpers::ec_schema();
  auto templates = test_helpers::ec_templates();
  Dataset train = sentiment_train(4);
  train.examples[2].gold = "uncertain";

  auto records =
      build_sft_corpus(train, schema, StrategyId::uncertainty(), 1, templates);
  CHECK(records[2].target == "Category: uncertain");
  CHECK(records[0].prompt.find("if unsure, please reply") != std::string::npos);
}

TEST_CASE("ppl cannot be a training strategy") {
  auto schema = test_helpers::ec_schema();
  auto templates = test_helpers::ec_templates();
  Dataset train = sentiment_train(3);
  CHECK_THROWS_AS(build_sft_corpus(train, schema, StrategyId::ppl(), 0, templates),
                  Error);
}

TEST_CASE("token counter annotates prompt+target lengths") {
  auto schema = test_helpers::ec_schema();
  auto templates = test_helpers::ec_templates();
  Dataset train = sentiment_train(3);
  CorpusOptions options;
  options.token_counter = [](const std::string& s) {
    return whitespace_token_count(s);
  };
  auto records =
      build_sft_corpus(train, schema, StrategyId::zero_shot(), 1, templates, options);
  for (const auto& r : records) {
    REQUIRE(r.token_length.has_value());
    CHECK(*r.token_length ==
          whitespace_token_count(r.prompt) + whitespace_token_count(r.target));
  }
}

TEST_CASE("relabeling: the two-model qualification rule") {
  auto schema = test_helpers::ec_schema();
  Dataset train;
  train.examples.push_back(make_example("a", "t1", "joy"));
  train.examples.push_back(make_example("b", "t2", "joy"));
  train.examples.push_back(make_example("c", "t3", "joy"));

  std::map<std::string, Prediction> m1{
      {"a", pred("a", "joy", -1)},    // right
      {"b", pred("b", "anger", -1)},  // wrong
      {"c", pred("c", "anger", -1)},  // wrong
  };
  std::map<std::string, Prediction> m2{
      {"a", pred("a", "anger", -1)},  // wrong but m1 right
      {"b", pred("b", "joy", -1)},    // right
      {"c", pred("c", "fear", -1)},   // wrong
  };

  auto [relabeled, report] = relabel_uncertain(train, schema, m1, m2, 0.5);
  CHECK(relabeled.examples[0].gold == "joy");
  CHECK(relabeled.examples[1].gold == "joy");
  CHECK(relabeled.examples[2].gold == "uncertain");
  CHECK(report.n_qualified == 1);
  CHECK(report.n_relabeled == 1);
  CHECK(report.relabeled_ids == std::vector<std::string>{"c"});
}

TEST_CASE("relabeling: over the cap keeps the lowest mean confidence") {
  auto schema = test_helpers::ec_schema();
  Dataset train = sentiment_train(100);

  std::map<std::string, Prediction> m1, m2;
  SplitMix64 rng(99);
  std::vector<std::pair<std::string, double>> qualified_confidences;
  for (size_t i = 0; i < train.examples.size(); ++i) {
    const auto& ex = train.examples[i];
    bool qualify = i < 15;  // exactly 15 qualified
    std::string wrong = ex.gold == "joy" ? "anger" : "joy";
    double c1 = -rng.uniform() * 5.0;
    double c2 = -rng.uniform() * 5.0;
    m1[ex.id] = pred(ex.id, qualify ? wrong : ex.gold, c1);
    m2[ex.id] = pred(ex.id, wrong, c2);
    if (qualify) qualified_confidences.emplace_back(ex.id, (c1 + c2) / 2.0);
  }

  auto [relabeled, report] = relabel_uncertain(train, schema, m1, m2, 0.10);
  CHECK(report.n_qualified == 15);
  CHECK(report.n_relabeled == 10);

  // Independent oracle: sort the qualified ids by mean confidence and take 10.
  std::stable_sort(qualified_confidences.begin(), qualified_confidences.end(),
                   [](const auto& a, const auto& b) {
                     if (a.second != b.second) return a.second < b.second;
                     return a.first < b.first;
                   });
  std::set<std::string> expected;
  for (size_t i = 0; i < 10; ++i) expected.insert(qualified_confidences[i].first);
  std::set<std::string> got(report.relabeled_ids.begin(), report.relabeled_ids.end());
  CHECK(got == expected);

  size_t n_uncertain = 0;
  for (const auto& ex : relabeled.examples) {
    if (ex.gold == "uncertain") ++n_uncertain;
  }
  CHECK(n_uncertain == 10);
  CHECK(validate_dataset(relabeled, schema).pass());
}

TEST_CASE("relabeling: cap never exceeded over random trials") {
  auto schema = test_helpers::ec_schema();
  SplitMix64 rng(7);
  for (int trial = 0; trial < 200; ++trial) {
    size_t n = 5 + rng.bounded(60);
    Dataset train = sentiment_train(n);
    std::map<std::string, Prediction> m1, m2;
    for (const auto& ex : train.examples) {
      bool w1 = rng.bounded(2) == 0;
      bool w2 = rng.bounded(2) == 0;
      std::string wrong = ex.gold == "joy" ? "anger" : "joy";
      m1[ex.id] = pred(ex.id, w1 ? wrong : ex.gold, -rng.uniform());
      m2[ex.id] = pred(ex.id, w2 ? wrong : ex.gold, -rng.uniform());
    }
    auto [relabeled, report] = relabel_uncertain(train, schema, m1, m2, 0.10);
    CHECK(report.n_relabeled <= static_cast<size_t>(0.10 * n));
    CHECK(report.n_relabeled <= report.n_qualified);
  }
}

TEST_CASE("relabeling: boundary ties break by ascending id") {
  auto schema = test_helpers::ec_schema();
  Dataset train = sentiment_train(20);  // cap = 2
  std::map<std::string, Prediction> m1, m2;
  for (size_t i = 0; i < train.examples.size(); ++i) {
    const auto& ex = train.examples[i];
    bool qualify = i < 4;
    std::string wrong = ex.gold == "joy" ? "anger" : "joy";
    m1[ex.id] = pred(ex.id, qualify ? wrong : ex.gold, -1.0);  // all tied
    m2[ex.id] = pred(ex.id, wrong, -1.0);
  }
  auto [relabeled, report] = relabel_uncertain(train, schema, m1, m2, 0.10);
  REQUIRE(report.n_relabeled == 2);
  CHECK(report.relabeled_ids == std::vector<std::string>{"ex0", "ex1"});
}

TEST_CASE("relabeling error paths") {
  auto schema = test_helpers::ec_schema();
  Dataset train = sentiment_train(20);
  std::map<std::string, Prediction> m1, m2;
  for (const auto& ex : train.examples) {
    Prediction p = pred(ex.id, ex.gold == "joy" ? "anger" : "joy", -1.0);
    p.confidence.reset();
    m1[ex.id] = p;
    m2[ex.id] = p;
  }

  SUBCASE("missing confidence only matters over the cap") {
    // 20 qualified, cap 2 -> selection needs confidences.
    CHECK_THROWS_AS(relabel_uncertain(train, schema, m1, m2, 0.10), Error);
    // Cap of 100% never selects, so missing confidences are fine.
    auto [relabeled, report] = relabel_uncertain(train, schema, m1, m2, 1.0);
    CHECK(report.n_relabeled == 20);
  }
  SUBCASE("missing prediction") {
    m2.erase("ex3");
    CHECK_THROWS_AS(relabel_uncertain(train, schema, m1, m2, 0.10), Error);
  }
  SUBCASE("schema without an uncertain label") {
    LabelSchema bare;
    bare.labels = schema.labels;
    CHECK_THROWS_AS(relabel_uncertain(train, bare, m1, m2, 0.10), Error);
  }
  SUBCASE("format failures qualify as wrong") {
    Dataset two = sentiment_train(2);
    std::map<std::string, Prediction> f1, f2;
    for (const auto& ex : two.examples) {
      Prediction p;
      p.example_id = ex.id;
      p.format_ok = false;
      f1[ex.id] = p;
      f2[ex.id] = p;
    }
    auto [relabeled, report] = relabel_uncertain(two, schema, f1, f2, 1.0);
    CHECK(report.n_qualified == 2);
  }
}

TEST_CASE("reasoning corpus emits parseable targets in all three orders") {
  auto schema = test_helpers::ec_schema();
  std::vector<ReasonTriple> triples;
  for (int i = 0; i < 5; ++i) {
    ReasonTriple t;
    t.example_id = "r" + std::to_string(i);
    t.think = "longer deliberation " + std::to_string(i);
    t.reason = "concise explanation " + std::to_string(i);
    t.class_label = schema.labels[i % schema.labels.size()];
    triples.push_back(t);
  }

  for (ReasonOrder order : {ReasonOrder::ClassThenReason, ReasonOrder::ReasonThenClass,
                            ReasonOrder::ThinkReasonClass}) {
    auto records = build_reasoning_corpus(triples, order, schema);
    REQUIRE(records.size() == triples.size());
    for (size_t i = 0; i < records.size(); ++i) {
      auto parts = parse_tagged(records[i].target, order);
      REQUIRE(parts.has_value());
      CHECK(parts->answer == triples[i].class_label);
      CHECK(parts->reason == triples[i].reason);
      if (order == ReasonOrder::ThinkReasonClass) {
        CHECK(parts->think == triples[i].think);
      }
      CHECK(records[i].strategy == to_string(order));
    }
  }

  SUBCASE("component order in the raw target") {
    auto rc = build_reasoning_corpus({triples[0]}, ReasonOrder::ReasonThenClass, schema);
    CHECK(rc[0].target.starts_with("<reason>"));
    CHECK(rc[0].target.ends_with("</answer>"));
    auto cr = build_reasoning_corpus({triples[0]}, ReasonOrder::ClassThenReason, schema);
    CHECK(cr[0].target.starts_with("<answer>"));
    CHECK(cr[0].target.find("<answer>") < cr[0].target.find("<reason>"));
  }

  SUBCASE("think is required for the think order") {
    ReasonTriple t = triples[0];
    t.think.reset();
    CHECK_THROWS_AS(
        build_reasoning_corpus({t}, ReasonOrder::ThinkReasonClass, schema), Error);
    CHECK_NOTHROW(build_reasoning_corpus({t}, ReasonOrder::ReasonThenClass, schema));
  }

  SUBCASE("unknown class label") {
    ReasonTriple t = triples[0];
    t.class_label = "nope";
    CHECK_THROWS_AS(build_reasoning_corpus({t}, ReasonOrder::ReasonThenClass, schema),
                    Error);
  }

  SUBCASE("full prompts when a dataset and templates are supplied") {
    auto templates = test_helpers::ec_templates();
    Dataset train;
    train.examples.push_back(make_example("r0", "the original input", "joy"));
    auto records = build_reasoning_corpus({triples[0]}, ReasonOrder::ReasonThenClass,
                                          schema, &train, &templates);
    CHECK(records[0].prompt.find("the original input") != std::string::npos);
    CHECK(records[0].prompt.find("<reason> reasoning process here </reason>") !=
          std::string::npos);
  }
}

TEST_CASE("packing: the hand case and boundaries") {
  std::vector<TrainingRecord> records;
  size_t lengths[] = {30, 50, 40, 20, 60};
  for (size_t i = 0; i < 5; ++i) {
    records.push_back(sized_record("r" + std::to_string(i), lengths[i]));
  }
  auto packs = pack_records(records, 100, PackMode::Neat);
  REQUIRE(packs.size() == 3);
  CHECK(packs[0].segments.size() == 2);  // 30, 50
  CHECK(packs[1].segments.size() == 2);  // 40, 20
  CHECK(packs[2].segments.size() == 1);  // 60
  CHECK(packs[0].total_length == 80);
  CHECK(packs[1].total_length == 60);
  CHECK(packs[2].total_length == 60);
  CHECK(packs[0].segments[1].offset == 30);
  CHECK(!packs[0].cross_attending());

  SUBCASE("a record exactly at max_len fills one pack") {
    auto single = pack_records({sized_record("one", 100)}, 100, PackMode::Standard);
    REQUIRE(single.size() == 1);
    REQUIRE(single[0].segments.size() == 1);
    CHECK(single[0].total_length == 100);
    CHECK(single[0].cross_attending());
  }
  SUBCASE("oversized records are rejected") {
    CHECK_THROWS_AS(pack_records({sized_record("big", 101)}, 100, PackMode::Neat),
                    Error);
  }
  SUBCASE("missing token_length is rejected") {
    TrainingRecord r = sized_record("x", 10);
    r.token_length.reset();
    CHECK_THROWS_AS(pack_records({r}, 100, PackMode::Neat), Error);
  }
}

TEST_CASE("packing conserves records and respects max_len") {
  SplitMix64 rng(500);
  for (int trial = 0; trial < 200; ++trial) {
    size_t max_len = 50 + rng.bounded(200);
    size_t n = 1 + rng.bounded(80);
    std::vector<TrainingRecord> records;
    for (size_t i = 0; i < n; ++i) {
      records.push_back(
          sized_record("r" + std::to_string(i), 1 + rng.bounded(max_len)));
    }
    PackMode mode = rng.bounded(2) == 0 ? PackMode::Standard : PackMode::Neat;
    auto packs = pack_records(records, max_len, mode);

    std::multiset<std::string> packed_ids;
    for (const auto& pack : packs) {
      CHECK(pack.total_length <= max_len);
      CHECK(pack.mode == mode);
      size_t offset = 0;  // segment boundaries partition [0, total)
      for (const auto& seg : pack.segments) {
        CHECK(seg.offset == offset);
        offset += seg.length;
        packed_ids.insert(seg.example_id);
      }
      CHECK(offset == pack.total_length);
    }
    std::multiset<std::string> input_ids;
    for (const auto& r : records) input_ids.insert(r.example_id);
    CHECK(packed_ids == input_ids);
  }
}

TEST_CASE("corpus and pack files round trip") {
  auto schema = test_helpers::ec_schema();
  auto templates = test_helpers::ec_templates();
  Dataset train = sentiment_train(6);
  CorpusOptions options;
  options.token_counter = [](const std::string& s) {
    return whitespace_token_count(s);
  };
  auto records =
      build_sft_corpus(train, schema, StrategyId::n_shot(1), 3, templates, options);

  auto corpus_path =
      (std::filesystem::temp_directory_path() / "genclass_corpus_rt.jsonl").string();
  save_corpus(records, corpus_path);
  auto loaded = load_corpus(corpus_path);
  REQUIRE(loaded.size() == records.size());
  for (size_t i = 0; i < records.size(); ++i) {
    CHECK(loaded[i].prompt == records[i].prompt);
    CHECK(loaded[i].target == records[i].target);
    CHECK(loaded[i].token_length == records[i].token_length);
  }

  auto packs = pack_records(records, 400, PackMode::Neat);
  auto packs_path =
      (std::filesystem::temp_directory_path() / "genclass_packs_rt.jsonl").string();
  save_packs(packs, packs_path);
  auto loaded_packs = load_packs(packs_path);
  REQUIRE(loaded_packs.size() == packs.size());
  CHECK(loaded_packs[0].total_length == packs[0].total_length);
  CHECK(loaded_packs[0].segments.size() == packs[0].segments.size());

  std::vector<ReasonTriple> triples{{"a", std::nullopt, "because", "joy"}};
  auto triples_path =
      (std::filesystem::temp_directory_path() / "genclass_triples_rt.jsonl").string();
  save_reason_triples(triples, triples_path);
  auto loaded_triples = load_reason_triples(triples_path);
  REQUIRE(loaded_triples.size() == 1);
  CHECK(loaded_triples[0].class_label == "joy");
  CHECK(!loaded_triples[0].think);
}

}  // TEST_SUITE
