#include <gtest/gtest.h>

#include <cmath>
#include <functional>
#include <set>

#include "prockit/benchgen.hpp"
#include "prockit/error.hpp"
#include "prockit/random.hpp"
#include "prockit/text.hpp"
#include "support/oracles.hpp"
#include "support/synth.hpp"

namespace prockit {
namespace {

ErrorCode code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error raised";
  return ErrorCode::kIo;
}

CandidatePool goal_pool(const std::vector<std::string>& goals) {
  std::vector<CandidatePool::Item> items;
  for (std::size_t i = 0; i < goals.size(); ++i) {
    const std::string id = "g" + std::to_string(100 + i);
    items.push_back({id, goals[i], id});
  }
  return CandidatePool::build(std::move(items), Embedder::hashed_char_ngram());
}

std::vector<std::string> texts(const std::vector<CandidatePool::Item>& items) {
  std::vector<std::string> out;
  for (const auto& i : items) out.push_back(i.text);
  return out;
}

TEST(SampleDistractors, ReceiptGoalsRankAboveUnrelated) {
  const auto pool = goal_pool({"Play the guitar", "Write a receipt", "Bake sourdough bread",
                               "Print a Uber receipt", "Organize receipt", "Learn French",
                               "Create a donation receipt", "Wash a car"});
  for (auto method : {DistractorMethod::kBm25, DistractorMethod::kEmbedding}) {
    auto got = texts(sample_distractors("organize receipt", pool, 3, method));
    std::sort(got.begin(), got.end());
    EXPECT_EQ(got, (std::vector<std::string>{"Create a donation receipt", "Print a Uber receipt",
                                             "Write a receipt"}))
        << distractor_method_name(method);
  }
}

TEST(SampleDistractors, ForcedSelection) {
  const auto pool = goal_pool({"Organize receipt", "Play the guitar", "Learn French", "Wash a car"});
  for (auto method : {DistractorMethod::kBm25, DistractorMethod::kEmbedding}) {
    auto got = texts(sample_distractors("Organize receipt", pool, 3, method));
    std::sort(got.begin(), got.end());
    EXPECT_EQ(got, (std::vector<std::string>{"Learn French", "Play the guitar", "Wash a car"}));
    EXPECT_EQ(code_of([&] { sample_distractors("Organize receipt", pool, 4, method); }),
              ErrorCode::kPoolTooSmall);
  }
  EXPECT_EQ(code_of([&] { sample_distractors("x", pool, 0, DistractorMethod::kBm25); }),
            ErrorCode::kUsage);
}

TEST(SampleDistractors, PlantedNearDuplicateFirst) {
  const auto docs = synth::documents(500, 77);
  std::vector<CandidatePool::Item> items;
  for (const auto& [id, t] : docs) items.push_back({id, t, id});
  const std::string target = docs[123].second + " zzplanted";
  items.push_back({"planted", docs[123].second + " extra", "planted"});
  items[123].text = target;  // the target itself is in the pool and skipped
  const auto pool = CandidatePool::build(items, Embedder::hashed_char_ngram());

  std::vector<std::pair<std::string, std::string>> oracle_docs;
  for (const auto& it : pool.items())
    if (it.text != target) oracle_docs.emplace_back(it.id, it.text);
  const auto want = oracle::bm25_all(oracle_docs, target);
  ASSERT_FALSE(want.empty());
  EXPECT_EQ(want.front().id, "planted");
  EXPECT_EQ(sample_distractors(target, pool, 1, DistractorMethod::kBm25)[0].id, want.front().id);

  const auto e = Embedder::hashed_char_ngram();
  std::vector<std::pair<std::string, Vector>> vecs;
  for (const auto& it : pool.items())
    if (it.text != target) vecs.emplace_back(it.id, e.embed(it.text));
  const auto near = oracle::knn_scan(vecs, e.embed(target), 1, Metric::kCosine);
  EXPECT_EQ(near.front().id, "planted");
  EXPECT_EQ(sample_distractors(target, pool, 1, DistractorMethod::kEmbedding)[0].id, "planted");
}

TEST(SampleDistractors, ZeroScorePaddingInIdOrder) {
  const auto pool = goal_pool({"Write a receipt", "Play the guitar", "Learn French", "Wash a car"});
  const auto got = sample_distractors("organize receipt", pool, 3, DistractorMethod::kBm25);
  EXPECT_EQ(texts(got),
            (std::vector<std::string>{"Write a receipt", "Play the guitar", "Learn French"}));
}

TEST(FilterFalseNegatives, Examples) {
  EXPECT_EQ(code_of([] { filter_false_negatives({"Organize receipt"}, "organize receipt", 0.99); }),
            ErrorCode::kAllFiltered);
  const std::vector<std::string> cands = {"organize receipt for a small business", "play guitar",
                                          "organize receipt"};
  EXPECT_NEAR(text::jaccard(cands[0], "organize receipt"), 2.0 / 6.0, 1e-12);
  EXPECT_EQ(filter_false_negatives(cands, "organize receipt", 0.5),
            (std::vector<std::string>{"organize receipt for a small business", "play guitar"}));
  EXPECT_EQ(filter_false_negatives(cands, "organize receipt", 0.3),
            (std::vector<std::string>{"play guitar"}));
  EXPECT_EQ(code_of([] { filter_false_negatives({}, "x", 0.5); }), ErrorCode::kUsage);
  EXPECT_EQ(code_of([] { filter_false_negatives({"a"}, "x", 1.5); }), ErrorCode::kUsage);
}

MultipleChoiceExample stay_healthy() {
  MultipleChoiceExample ex;
  ex.prompt = "stay healthy";
  ex.prompt_provenance = {"stay-healthy", "stay-healthy"};
  ex.choices = {"work out", "work long hours", "try out local restaurants", "eat a lot of food"};
  ex.provenance = {ChoiceProvenance{"stay-healthy", "s1"}, ChoiceProvenance{"get-promoted", "s2"},
                   ChoiceProvenance{"visit-a-new-city", "s3"}, ChoiceProvenance{"gain-weight", "s4"}};
  ex.answer_index = 0;
  return ex;
}

CounterpartMap stay_healthy_goals() {
  return {{"s1", {"stay healthy", {"stay-healthy", "stay-healthy"}}},
          {"s2", {"get promoted", {"get-promoted", "get-promoted"}}},
          {"s3", {"visit a new city", {"visit-a-new-city", "visit-a-new-city"}}},
          {"s4", {"gain weight", {"gain-weight", "gain-weight"}}}};
}

TEST(DebiasReassign, PromptFollowsNewAnswer) {
  const auto ex = stay_healthy();
  const auto goals = stay_healthy_goals();
  std::uint64_t seed = 0;
  while (Rng(seed).uniform_index(4) != 2) ++seed;
  const auto out = debias_reassign(ex, goals, seed);
  EXPECT_EQ(out.answer_index, 2u);
  EXPECT_EQ(out.choices[out.answer_index], "try out local restaurants");
  EXPECT_EQ(out.prompt, "visit a new city");
  EXPECT_EQ(out.prompt_provenance.article_id, "visit-a-new-city");
  EXPECT_TRUE(out.audit.reassigned);
  EXPECT_EQ(out.choices, ex.choices);
  EXPECT_EQ(debias_reassign(ex, goals, seed), out);
}

TEST(DebiasReassign, MissingCounterpart) {
  auto goals = stay_healthy_goals();
  goals.erase("s4");
  EXPECT_EQ(code_of([&] { debias_reassign(stay_healthy(), goals, 1); }),
            ErrorCode::kMissingCounterpart);
}

TEST(DebiasReassign, PositionsUniform) {
  const auto ex = stay_healthy();
  const auto goals = stay_healthy_goals();
  std::array<std::size_t, 4> hist{};
  for (std::uint64_t i = 0; i < 10000; ++i)
    ++hist[debias_reassign(ex, goals, derive_seed(5, std::to_string(i))).answer_index];
  for (auto n : hist) EXPECT_NEAR(n / 10000.0, 0.25, 0.03);
  EXPECT_LT(position_chi_square(hist), kChiSquareCritical3df001);
}

TEST(ChiSquare, HandComputed) {
  EXPECT_DOUBLE_EQ(position_chi_square({25, 25, 25, 25}), 0.0);
  // expected 25 each: (10^2 + 10^2 + 0 + 0) / 25 = 8
  EXPECT_DOUBLE_EQ(position_chi_square({35, 15, 25, 25}), 8.0);
}

Article procedure(const std::string& id, const std::string& title,
                  const std::vector<std::vector<std::string>>& methods) {
  Article a;
  a.id = id;
  a.title = title;
  for (std::size_t m = 0; m < methods.size(); ++m) {
    MethodSection sec;
    sec.name = "Method " + std::to_string(m + 1);
    for (std::size_t s = 0; s < methods[m].size(); ++s)
      sec.steps.push_back({id + "#" + std::to_string(m) + "#" + std::to_string(s), methods[m][s], {}, {}, {}});
    a.methods.push_back(std::move(sec));
  }
  return a;
}

TEST(GenOrdering, WorkedExamplePairs) {
  std::vector<Article> arts;
  arts.push_back(procedure("wash-silverware", "Wash silverware",
                           {{"Rinse the silverware.", "Dry the silverware."}}));
  arts.push_back(procedure("have-an-office-potluck", "Have an office potluck",
                           {{"Buy food.", "Go to the office."}}));
  const auto corpus = Corpus::from_articles(std::move(arts));
  const auto got = gen_ordering(corpus, {true, 1});
  ASSERT_EQ(got.size(), 4u);
  const OrderingExample want{"Wash silverware", "Rinse the silverware.", "Dry the silverware.",
                             OrderLabel::kAFirst, "wash-silverware", 0, 1};
  EXPECT_NE(std::find(got.begin(), got.end(), want), got.end());
  const OrderingExample potluck{"Have an office potluck", "Buy food.", "Go to the office.",
                                OrderLabel::kAFirst, "have-an-office-potluck", 0, 1};
  EXPECT_NE(std::find(got.begin(), got.end(), potluck), got.end());
}

TEST(GenOrdering, FlipBalancedAndClosedUnderSwap) {
  const auto corpus = Corpus::from_articles(synth::articles(200, 7, 31));
  const auto got = gen_ordering(corpus, {true, 3});
  std::size_t a_first = 0;
  for (const auto& ex : got) a_first += ex.label == OrderLabel::kAFirst;
  EXPECT_EQ(a_first * 2, got.size());
  for (const auto& ex : got) {
    OrderingExample swapped{ex.goal, ex.step_b, ex.step_a,
                            ex.label == OrderLabel::kAFirst ? OrderLabel::kBFirst : OrderLabel::kAFirst,
                            ex.article_id, ex.index_b, ex.index_a};
    EXPECT_NE(std::find(got.begin(), got.end(), swapped), got.end());
  }
  // 6 adjacent + 6 sampled non-adjacent pairs per 7-step method, two orientations.
  EXPECT_EQ(got.size(), 200u * 12 * 2);
}

TEST(GenOrdering, UnflippedLabelsMatchProvenance) {
  std::vector<Article> arts = synth::articles(100, 5, 8);
  arts.push_back(procedure("multi", "Multi method", {{"Boil water.", "Add pasta.", "Drain pasta."},
                                                     {"Open the jar.", "Heat the sauce."}, {"Serve."}}));
  const auto corpus = Corpus::from_articles(std::move(arts));
  const auto got = gen_ordering(corpus, {false, 4});
  std::size_t a_first = 0;
  std::set<std::tuple<std::string, std::size_t, std::size_t>> seen;
  for (const auto& ex : got) {
    const Article* a = corpus.find(ex.article_id);
    ASSERT_NE(a, nullptr);
    const auto steps = a->steps();
    EXPECT_EQ(steps[ex.index_a]->headline, ex.step_a);
    EXPECT_EQ(steps[ex.index_b]->headline, ex.step_b);
    EXPECT_NE(ex.step_a, ex.step_b);
    EXPECT_EQ(ex.label == OrderLabel::kAFirst, ex.index_a < ex.index_b);
    const auto* ra = corpus.find_step(steps[ex.index_a]->id);
    const auto* rb = corpus.find_step(steps[ex.index_b]->id);
    EXPECT_EQ(ra->method_index, rb->method_index);
    EXPECT_TRUE(seen.insert({ex.article_id, std::min(ex.index_a, ex.index_b),
                             std::max(ex.index_a, ex.index_b)}).second);
    a_first += ex.label == OrderLabel::kAFirst;
  }
  EXPECT_GT(a_first, got.size() / 3);
  EXPECT_LT(a_first, 2 * got.size() / 3);
  EXPECT_EQ(got, gen_ordering(corpus, {false, 4}));
}

void check_mc_invariants(const Corpus& corpus, const McDataset& ds, bool debiased, double max_overlap) {
  for (const auto& ex : ds.examples) {
    std::set<std::string> folded;
    std::set<std::string> articles;
    for (std::size_t i = 0; i < 4; ++i) {
      folded.insert(text::casefold(ex.choices[i]));
      articles.insert(ex.provenance[i].article_id);
      const Article* a = corpus.find(ex.provenance[i].article_id);
      ASSERT_NE(a, nullptr);
      if (ex.task == McTask::kStepInference) {
        const auto* ref = corpus.find_step(ex.provenance[i].ref);
        ASSERT_NE(ref, nullptr);
        EXPECT_EQ(ref->step->headline, ex.choices[i]);
      } else {
        EXPECT_EQ(a->title, ex.choices[i]);
      }
    }
    EXPECT_EQ(folded.size(), 4u);
    EXPECT_EQ(articles.size(), 4u);
    ASSERT_LT(ex.answer_index, 4u);
    EXPECT_EQ(ex.provenance[ex.answer_index].article_id, ex.prompt_provenance.article_id);
    EXPECT_EQ(ex.audit.reassigned, debiased);
    if (!debiased)
      for (std::size_t i = 0; i < 4; ++i)
        if (i != ex.answer_index)
          EXPECT_LE(text::jaccard(ex.choices[i], ex.choices[ex.answer_index]), max_overlap);
  }
}

TEST(GenMultipleChoice, InvariantsAndDeterminism) {
  const auto corpus = Corpus::from_articles(synth::articles(300, 5, 12));
  for (auto task : {McTask::kStepInference, McTask::kGoalInference}) {
    for (bool debias : {false, true}) {
      McOptions opt;
      opt.task = task;
      opt.seed = 99;
      opt.per_article = 2;
      opt.debias = debias;
      opt.max_overlap = 0.3;
      const auto ds = gen_multiple_choice(corpus, opt);
      EXPECT_EQ(ds.examples.size() + ds.audit.skipped, 600u);
      EXPECT_GT(ds.examples.size(), 550u);
      check_mc_invariants(corpus, ds, debias, opt.max_overlap);
      const auto again = gen_multiple_choice(corpus, opt);
      EXPECT_EQ(again.examples, ds.examples);
    }
  }
}

TEST(GenMultipleChoice, SkipsWhenPoolCannotSupplyDistractors) {
  std::vector<Article> arts;
  arts.push_back(procedure("a", "Boil an egg", {{"Boil water.", "Add the egg."}}));
  arts.push_back(procedure("b", "Make tea", {{"Boil water.", "Add tea."}}));
  arts.push_back(procedure("c", "Fry an egg", {{"Heat oil.", "Crack the egg."}}));
  const auto corpus = Corpus::from_articles(std::move(arts));
  McOptions opt;
  const auto ds = gen_multiple_choice(corpus, opt);
  EXPECT_TRUE(ds.examples.empty());
  EXPECT_EQ(ds.audit.skipped, 3u);
}

TEST(GenMultipleChoice, Audit) {
  const auto corpus = Corpus::from_articles(synth::articles(400, 5, 21));
  McOptions opt;
  opt.per_article = 5;
  opt.seed = 4;
  const auto ds = gen_multiple_choice(corpus, opt);
  const auto& r = ds.audit;
  std::size_t total = 0;
  for (auto n : r.position_histogram) total += n;
  EXPECT_EQ(total, ds.examples.size());
  EXPECT_NEAR(r.chi_square, position_chi_square(r.position_histogram), 1e-12);
  EXPECT_LE(r.frequency_baseline, 0.30);
  EXPECT_LE(r.length_baseline, 0.30);
  const auto report = audit_report_text(r);
  EXPECT_NE(report.find("chi_square\t"), std::string::npos);
  EXPECT_NE(report.find("length_baseline\t"), std::string::npos);
}

TEST(GenMultipleChoice, JsonShape) {
  const auto corpus = Corpus::from_articles(synth::articles(50, 4, 2));
  const auto ds = gen_multiple_choice(corpus, McOptions{});
  ASSERT_FALSE(ds.examples.empty());
  const auto line = mc_example_to_json(ds.examples[0]);
  EXPECT_EQ(line.find('\n'), std::string::npos);
  EXPECT_NE(line.find("\"answer_index\":"), std::string::npos);
  EXPECT_NE(line.find("\"distractor_method\":\"bm25\""), std::string::npos);
}

}  // namespace
}  // namespace prockit
