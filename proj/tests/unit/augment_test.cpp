// Copyright 2026 The vqaeval Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <gtest/gtest.h>

#include <fstream>
#include <sstream>

#include "vqaeval/augment.hpp"

namespace vqaeval {
namespace {

const std::string kFixtures = VQAEVAL_FIXTURE_DIR;
const std::string kResources = VQAEVAL_RESOURCE_DIR;

SynonymLookup fixture_lexicon() {
  SynonymLookup lookup;
  wordnet::load_directory(kFixtures + "/wordnet", lookup);
  load_frequencies(kFixtures + "/frequencies.txt", lookup);
  return lookup;
}

Sample sample(std::string id, std::string q, std::string a) {
  Sample s;
  s.id = std::move(id);
  s.question = std::move(q);
  s.answer = std::move(a);
  s.response = s.answer;
  s.source_dataset = SourceDataset::parse("okvqa");
  s.group_id = s.id;
  return s;
}

TEST(Templates, ShippedFileMatchesBuiltIns) {
  const auto loaded = load_templates(kResources + "/answer_templates.txt");
  EXPECT_EQ(loaded, default_templates());
  std::ifstream f(kResources + "/answer_templates.txt", std::ios::binary);
  const std::string bytes((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
  std::string rebuilt;
  for (const auto& t : kAnswerTemplates) rebuilt += std::string(t) + "\n";
  EXPECT_EQ(bytes, rebuilt);
  EXPECT_EQ(fill_template(kAnswerTemplates[1], "elephants"),
            "The answer to this question is elephants.");
  EXPECT_THROW(fill_template("no slot", "x"), Error);
}

TEST(Nli, RoleMappingAndDegenerateRecords) {
  const auto g = nli_pair("a man eats", "a person eats", "a man sleeps");
  ASSERT_TRUE(g.pair);
  EXPECT_EQ(g.pair->anchor, "a man eats");
  EXPECT_EQ(g.pair->positive, "a person eats");
  EXPECT_EQ(g.pair->hard_negative, "a man sleeps");
  EXPECT_EQ(g.pair->task, TaskTag::kNli);
  EXPECT_EQ(nli_pair("same", "same", "other").skip_reason, "anchor_equals_positive");
  EXPECT_EQ(nli_pair("a", "", "c").skip_reason, "empty_field");
}

TEST(Nli, FixtureFileGivesThreePairs) {
  std::ifstream f(kFixtures + "/nli.jsonl");
  const auto records = read_nli(f);
  ASSERT_EQ(records.size(), 3u);
  int ok = 0;
  for (const auto& r : records) ok += nli_pair(r.premise, r.entailment, r.contradiction).pair ? 1 : 0;
  EXPECT_EQ(ok, 3);
}

TEST(Candidates, ModalAndLessCommon) {
  auto s = sample("c1", "How many?", "9");
  s.candidates = std::vector<std::string>(7, "9");
  for (int i = 0; i < 3; ++i) s.candidates->push_back("9.0");
  const std::vector<std::string> space{"10", "9", "9.0", "eight"};
  const auto g = candidate_pair(s, space, 0);
  ASSERT_TRUE(g.pair);
  EXPECT_EQ(g.pair->anchor, "Question: How many? Answer: 9");
  EXPECT_EQ(g.pair->positive, "Question: How many? Answer: 9.0");
  const auto neg = g.pair->hard_negative;
  EXPECT_TRUE(neg == "Question: How many? Answer: 10" || neg == "Question: How many? Answer: eight");
}

TEST(Candidates, SkipsIdenticalAndTies) {
  auto s = sample("c2", "q", "cat");
  s.candidates = std::vector<std::string>(10, "cat");
  EXPECT_EQ(candidate_pair(s, {"dog"}, 0).skip_reason, "single_distinct_candidate");
  s.candidates = std::vector<std::string>{"a", "b"};
  EXPECT_EQ(candidate_pair(s, {"dog"}, 0).skip_reason, "no_less_common_candidate");
  s.candidates = std::vector<std::string>{"b", "b", "a", "c", "c"};
  const auto g = candidate_pair(s, {"dog"}, 0);
  ASSERT_TRUE(g.pair);
  EXPECT_EQ(g.pair->anchor, "Question: q Answer: b");  // tie with c broken lexicographically
  EXPECT_EQ(g.pair->positive, "Question: q Answer: a");
  EXPECT_EQ(g.pair->hard_negative, "Question: q Answer: dog");
  s.candidates = std::vector<std::string>{"b", "b", "a"};
  EXPECT_EQ(candidate_pair(s, {"a", "b"}, 0).skip_reason, "empty_answer_space");
}

TEST(Candidates, SeededDrawIsReproducible) {
  auto s = sample("c3", "q", "x");
  s.candidates = std::vector<std::string>{"x", "x", "y"};
  std::vector<std::string> space;
  for (int i = 0; i < 50; ++i) space.push_back("w" + std::to_string(100 + i));
  const auto first = candidate_pair(s, space, 5);
  // oracle: the same generator stream picks the same index into the eligible list
  Rng rng(mix_seed(5, "candidates:c3"));
  EXPECT_EQ(first.pair->hard_negative, "Question: q Answer: " + space[rng.index(space.size())]);
  EXPECT_EQ(candidate_pair(s, space, 5).pair, first.pair);
  int differs = 0;
  for (std::uint64_t seed = 6; seed < 16; ++seed)
    differs += candidate_pair(s, space, seed).pair->hard_negative != first.pair->hard_negative;
  EXPECT_GT(differs, 0);
}

TEST(SynonymAntonym, ConstructedLexicon) {
  const auto lex = fixture_lexicon();
  const auto g = synonym_antonym_pair(sample("s1", "How big is it?", "big"), lex, {"tiny"}, 0);
  ASSERT_TRUE(g.pair);
  EXPECT_EQ(g.pair->anchor, "Question: How big is it? Answer: big");
  EXPECT_EQ(g.pair->positive, "Question: How big is it? Answer: large");
  EXPECT_EQ(g.pair->hard_negative, "Question: How big is it? Answer: small");
  EXPECT_EQ(synonym_antonym_pair(sample("s2", "q", "zebra"), lex, {"tiny"}, 0).skip_reason,
            "no_synonym");
}

TEST(SynonymAntonym, MultiwordFallsBackToHeadWord) {
  const auto lex = fixture_lexicon();
  const std::vector<std::string> space{"cat", "dog", "gun dog"};
  // the whole phrase has a synset
  const auto whole = synonym_antonym_pair(sample("m1", "q", "golden retriever"), lex, space, 0);
  ASSERT_TRUE(whole.pair);
  EXPECT_EQ(whole.pair->positive, "Question: q Answer: yellow retriever");
  // only the head word does
  const auto head = synonym_antonym_pair(sample("m2", "q", "fluffy retriever"), lex, space, 0);
  ASSERT_TRUE(head.pair);
  EXPECT_EQ(head.pair->positive, "Question: q Answer: fluffy gun dog");
  // no antonym: the negative is drawn outside the synonyms
  EXPECT_TRUE(head.pair->hard_negative == "Question: q Answer: cat" ||
              head.pair->hard_negative == "Question: q Answer: dog");
}

TEST(Descriptions, TemplatesAndSubstitution) {
  const auto s = sample("d1", "What are the animals?", "elephants");
  const auto out = description_pairs(s, default_templates(), {}, {"dogs", "elephants"}, 0);
  ASSERT_EQ(out.size(), 6u);
  ASSERT_TRUE(out[1].pair);
  EXPECT_EQ(out[1].pair->anchor, "Question: What are the animals? Answer: elephants");
  EXPECT_EQ(out[1].pair->positive, "The answer to this question is elephants.");
  EXPECT_EQ(out[1].pair->hard_negative, "The answer to this question is dogs.");
  for (const auto& g : out) EXPECT_TRUE(g.pair && g.pair->well_formed());
}

TEST(Descriptions, SkipsDescriptionsWithoutTheAnswer) {
  const auto s = sample("d2", "What are the animals?", "elephants");
  const auto out = description_pairs(
      s, {}, {"Two elephants stand by the river.", "Two elephantses", "The animals are large."},
      {"dogs", "elephants"}, 0);
  ASSERT_EQ(out.size(), 3u);
  ASSERT_TRUE(out[0].pair);
  EXPECT_EQ(out[0].pair->hard_negative, "Two dogs stand by the river.");
  EXPECT_EQ(out[1].skip_reason, "answer_not_in_description");
  EXPECT_EQ(out[2].skip_reason, "answer_not_in_description");
}

TEST(Descriptions, LongAnswersAreNotAugmented) {
  const auto s = sample("d3", "q", "a very large elephant");
  const auto out = description_pairs(s, default_templates(), {}, {"dogs"}, 0);
  ASSERT_EQ(out.size(), 6u);
  for (const auto& g : out) EXPECT_EQ(g.skip_reason, "long_response");
}

class ScriptedGenerator : public TextGenerator {
 public:
  explicit ScriptedGenerator(std::vector<std::string> replies) : replies_(std::move(replies)) {}
  std::string complete(const std::string& prompt) override {
    prompts.push_back(prompt);
    if (next_ >= replies_.size()) throw Error("endpoint unavailable");
    const auto r = replies_[next_++];
    if (r == "!fail") throw Error("connection reset");
    return r;
  }
  std::vector<std::string> prompts;

 private:
  std::vector<std::string> replies_;
  std::size_t next_ = 0;
};

TEST(GenerateDescriptions, HappyPathAndPrompt) {
  ScriptedGenerator llm({R"(["The animals are elephants.", "Elephants are shown."])"});
  const auto r = generate_descriptions("What are the animals?", "elephants", llm);
  EXPECT_EQ(r.descriptions,
            (std::vector<std::string>{"The animals are elephants.", "Elephants are shown."}));
  EXPECT_EQ(r.attempts, 1);
  ASSERT_EQ(llm.prompts.size(), 1u);
  const auto& p = llm.prompts[0];
  EXPECT_NE(p.find("Question:What kind of dog is in the photo?  Answer:golden retriever.  Assertion:"),
            std::string::npos);
  EXPECT_NE(p.find("Question: What are the animals? Answer: elephants. Please think"), std::string::npos);
}

TEST(GenerateDescriptions, ParsesCommonReplyShapes) {
  EXPECT_EQ(parse_descriptions("```json\n{\"assertion1\": \"A.\", \"assertion2\": \"B.\", \"x\": \"C.\"}\n```"),
            (std::vector<std::string>{"A.", "B."}));
  EXPECT_EQ(parse_descriptions(R"({"assertions": ["one", "two", "three"]})"),
            (std::vector<std::string>{"one", "two"}));
  EXPECT_TRUE(parse_descriptions("Sure! Here they are: one, two").empty());
}

TEST(GenerateDescriptions, MalformedReplyRetriedThenSkipped) {
  ScriptedGenerator retry({"garbage", R"(["ok"])"});
  const auto r = generate_descriptions("q", "a", retry);
  EXPECT_TRUE(r.ok());
  EXPECT_EQ(r.attempts, 2);
  ScriptedGenerator broken({"garbage", "!fail", "more garbage"});
  const auto bad = generate_descriptions("q", "a", broken, 3);
  EXPECT_FALSE(bad.ok());
  EXPECT_EQ(bad.attempts, 3);
  EXPECT_EQ(bad.errors.size(), 3u);
}

TEST(GenerateDescriptions, BatchWithOneFailure) {
  std::vector<Sample> samples;
  for (int i = 0; i < 5; ++i) samples.push_back(sample("b" + std::to_string(i), "q" + std::to_string(i), "cat"));
  // the third sample sees three failures in a row
  ScriptedGenerator llm({R"(["a cat"])", R"(["a cat"])", "x", "x", "x", R"(["a cat"])", R"(["a cat"])"});
  DescriptionCache cache;
  const auto rep = generate_descriptions_batch(samples, llm, cache, 3);
  EXPECT_EQ(rep.requested, 5u);
  EXPECT_EQ(rep.augmented, 4u);
  EXPECT_EQ(rep.skipped, 1u);
  ASSERT_EQ(rep.log.size(), 1u);
  EXPECT_NE(rep.log[0].find("b2"), std::string::npos);
  EXPECT_EQ(cache.size(), 4u);

  std::stringstream io;
  cache.write(io);
  const auto replay = DescriptionCache::read(io);
  EXPECT_EQ(replay.size(), 4u);
  ScriptedGenerator silent({});
  auto again = replay;
  const auto rep2 = generate_descriptions_batch(samples, silent, again, 1);
  EXPECT_EQ(rep2.from_cache, 4u);
  EXPECT_EQ(rep2.skipped, 1u);
}

TEST(Morphology, Cascade) {
  const auto lex = fixture_lexicon();
  auto shift = [&](const char* w) { return morphology_shift(w, lex); };
  EXPECT_EQ(shift("elephant").text, "elephants");
  EXPECT_EQ(shift("elephant").rule, "plural");
  EXPECT_EQ(shift("run").text, "running");
  EXPECT_EQ(shift("run").rule, "verb_tense");
  const auto sc = shift("scissors");
  EXPECT_EQ(sc.text, "scissors");
  EXPECT_FALSE(sc.changed);
  EXPECT_EQ(sc.rule, "invariant");
  EXPECT_EQ(shift("elephants").text, "elephant");
  EXPECT_EQ(shift("children").text, "child");
  EXPECT_EQ(shift("mouse").text, "mice");
  EXPECT_EQ(shift("box").text, "boxes");
  EXPECT_EQ(shift("puppy").text, "puppies");
  EXPECT_EQ(shift("puppies").text, "puppy");
  EXPECT_EQ(shift("swim").text, "swimming");
  EXPECT_EQ(shift("golden retriever").text, "golden retrievers");
  EXPECT_EQ(shift("Red Bus").text, "red buses");
  const auto digits = shift("42");
  EXPECT_FALSE(digits.changed);
  EXPECT_EQ(digits.rule, "none");
}

TEST(Pipeline, CountsReconcileAndOutputIsStable) {
  const auto lex = fixture_lexicon();
  AugmentInputs in;
  in.samples = load_samples(kFixtures + "/samples.jsonl");
  std::ifstream nli(kFixtures + "/nli.jsonl");
  in.nli = read_nli(nli);
  in.lookup = &lex;
  const auto a = run_augmentation(in, {}, 7);
  const auto b = run_augmentation(in, {}, 7);
  std::stringstream sa, sb;
  write_pairs(sa, a.pairs);
  write_pairs(sb, b.pairs);
  EXPECT_EQ(sa.str(), sb.str());
  EXPECT_EQ(a.counts.size(), 4u);
  std::size_t emitted = 0;
  for (const auto& [task, c] : a.counts) {
    EXPECT_TRUE(c.reconciles()) << task;
    emitted += c.emitted;
  }
  EXPECT_EQ(emitted, a.pairs.size());
  for (const auto& p : a.pairs) EXPECT_TRUE(p.well_formed());
  EXPECT_EQ(a.counts.at("nli").emitted, 3u);
  EXPECT_EQ(a.counts.at("candidates").opportunities, 1u);
  EXPECT_EQ(read_pairs(sa), a.pairs);
}

}  // namespace
}  // namespace vqaeval
