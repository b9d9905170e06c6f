#include <selfex/explain/pipeline.hpp>
#include <selfex/llm/scripted_mock.hpp>
#include <selfex/tmk/json_io.hpp>

#include "generators.hpp"
#include "paths.hpp"

#include <gtest/gtest.h>

using namespace selfex;
using namespace selfex::explain;
using selfex::testing::data_path;

namespace {

std::shared_ptr<const tmk::TmkModel> sami() {
    static const auto m = std::make_shared<const tmk::TmkModel>(tmk::load_model(data_path("models/sami-mini.tmk.json")));
    return m;
}

std::shared_ptr<llm::ScriptedMock> sami_mock() {
    return std::make_shared<llm::ScriptedMock>(llm::ScriptedMock::load(data_path("mock/sami.mock.jsonl")));
}

// Replies from a fixed list, recording every request.
struct ListProvider : llm::ChatProvider {
    std::vector<std::string> replies;
    std::vector<llm::ChatRequest> seen;
    explicit ListProvider(std::vector<std::string> r) : replies(std::move(r)) {}
    std::string complete(const llm::ChatRequest& req) override {
        seen.push_back(req);
        return replies[std::min(seen.size() - 1, replies.size() - 1)];
    }
};

struct FailingProvider : llm::ChatProvider {
    std::string complete(const llm::ChatRequest&) override {
        throw llm::ProviderError(llm::ProviderErrorKind::exhausted_retries, 503, "down", 4);
    }
};

ClassifierOptions opts() { return {}; }

}  // namespace

// ---------------------------------------------------------------------------
// templates

TEST(Templates, ShippedFilesMatchBuiltInDefaults) {
    const auto loaded = PromptTemplates::load(selfex::testing::templates_dir());
    const auto builtin = PromptTemplates::defaults();
    for (const auto& [name, member] : PromptTemplates::files()) {
        EXPECT_EQ(loaded.*member, builtin.*member) << name;
    }
    EXPECT_EQ(loaded, builtin);
}

TEST(Templates, MissingDirectoryFallsBackToDefaults) {
    selfex::testing::TempDir dir;
    const auto t = PromptTemplates::load(dir.path());
    EXPECT_EQ(t.reason, PromptTemplates::defaults().reason);
}

TEST(Templates, RenderIsSinglePass) {
    EXPECT_EQ(render("{a} {b} {c} {", {{"a", "{b}"}, {"b", "B"}}), "{b} B {c} {");
    EXPECT_EQ(render("", {}), "");
}

// ---------------------------------------------------------------------------
// classifier

TEST(Classifier, ParseVerdict) {
    EXPECT_EQ(parse_verdict("kmodel, k=3", opts()), (ClassifierVerdict{QuestionClass::kmodel, 3}));
    EXPECT_EQ(parse_verdict("multimodel, k=99", opts()), (ClassifierVerdict{QuestionClass::multimodel, 10}));
    EXPECT_EQ(parse_verdict("MModel k: 0", opts()), (ClassifierVerdict{QuestionClass::mmodel, 1}));
    EXPECT_EQ(parse_verdict("I can't answer that", opts()), (ClassifierVerdict{QuestionClass::cant_answer, 5}));
    EXPECT_EQ(parse_verdict("cant_answer, k=-4", opts()), (ClassifierVerdict{QuestionClass::cant_answer, 1}));
    EXPECT_EQ(parse_verdict("kmodel, k=123456789012345", opts())->k, 10);
    EXPECT_FALSE(parse_verdict("banana", opts()).has_value());
    EXPECT_FALSE(parse_verdict("kmodels", opts()).has_value());
}

TEST(Classifier, UnreadableTwiceFallsBackToCantAnswer) {
    ListProvider p({"banana", "banana"});
    const auto v = classify("q", p, "SAMI", PromptTemplates::defaults(), opts());
    EXPECT_EQ(v, (ClassifierVerdict{QuestionClass::cant_answer, 5}));
    ASSERT_EQ(p.seen.size(), 2u);
    EXPECT_NE(p.seen[1].user_text.find(PromptTemplates::defaults().classify_retry), std::string::npos);
}

TEST(Classifier, StrictRetryCanRecover) {
    ListProvider p({"no idea", "kmodel, k=2"});
    EXPECT_EQ(classify("q", p, "SAMI", PromptTemplates::defaults(), opts()),
              (ClassifierVerdict{QuestionClass::kmodel, 2}));
}

TEST(Classifier, RequestCarriesQuestionAndClasses) {
    const auto req = classification_request("Why me?", "SAMI", PromptTemplates::defaults(), opts(), false);
    EXPECT_NE(req.user_text.find("Question: Why me?"), std::string::npos);
    EXPECT_NE(req.user_text.find("- "), std::string::npos);
    EXPECT_EQ(req.temperature, 0.0);
}

// ---------------------------------------------------------------------------
// localizer

TEST(Localizer, PermittedParts) {
    using tmk::Part;
    EXPECT_EQ(permitted_parts(QuestionClass::kmodel), (retrieval::PartSet{Part::knowledge}));
    EXPECT_EQ(permitted_parts(QuestionClass::mmodel), (retrieval::PartSet{Part::task, Part::method}));
    EXPECT_EQ(permitted_parts(QuestionClass::multimodel), retrieval::all_parts());
    EXPECT_TRUE(permitted_parts(QuestionClass::cant_answer).empty());
}

TEST(Localizer, RespectsClassAndK) {
    const auto index = retrieval::build_index(tmk::snippets(*sami()));
    const auto r = localize({QuestionClass::kmodel, 3}, "where do students live", index);
    ASSERT_EQ(r.size(), 3u);
    for (const auto& s : r) EXPECT_EQ(s.snippet.part, tmk::Part::knowledge);
    EXPECT_THROW(localize({QuestionClass::cant_answer, 3}, "x", index), std::invalid_argument);
    EXPECT_TRUE(localize({QuestionClass::kmodel, 3}, "x", retrieval::build_index({})).empty());
}

// ---------------------------------------------------------------------------
// reasoner

TEST(Reasoner, StepsFollowTheFsmWalk) {
    std::mt19937_64 rng(77);
    for (int trial = 0; trial < 30; ++trial) {
        const auto model = selfex::testing::random_method_model(rng);
        const auto& method = model.methods.begin()->second;
        const auto ctx = tmk::degrade(model, tmk::DegradationLevel(0));
        const tmk::Snippet s{"walked", tmk::Part::method, 0, tmk::method_snippet_text(method, model)};
        const auto p = build_reason_prompt("How do you walk?", {QuestionClass::mmodel, 4}, {{s, 1.0}}, model, ctx,
                                           PromptTemplates::defaults());
        EXPECT_EQ(p.steps, tmk::fsm_walk(method, model));
        ASSERT_TRUE(p.walked_method.has_value());
        EXPECT_NE(p.request.user_text.find(render_steps(p.steps)), std::string::npos);
        EXPECT_EQ(p.request.max_output_tokens, 64 + 96 * 4);
    }
}

TEST(Reasoner, CutAwayTargetsContributeNameOnly) {
    std::mt19937_64 rng(5);
    const auto model = selfex::testing::random_method_model(rng);
    const auto& method = model.methods.begin()->second;
    // level 3 keeps layer 0 (root and its method); the leaves are cut
    const auto ctx = tmk::degrade(model, tmk::DegradationLevel(3));
    const tmk::Snippet s{"walked", tmk::Part::method, 0, "x"};
    const auto p = build_reason_prompt("q", {QuestionClass::mmodel, 2}, {{s, 1.0}}, model, ctx,
                                       PromptTemplates::defaults());
    const auto full = tmk::fsm_walk(method, model);
    ASSERT_EQ(p.steps.size(), full.size());
    const auto order = tmk::walk_order(method);
    for (std::size_t i = 0; i < order.size(); ++i) {
        const auto& ann = method.transitions[order[i]].annotation;
        if (std::holds_alternative<tmk::SubtaskRef>(ann)) {
            EXPECT_EQ(p.steps[i].annotation_text, tmk::annotation_name(ann, model));
        } else {
            EXPECT_EQ(p.steps[i].annotation_text, full[i].annotation_text);
        }
        EXPECT_EQ(p.steps[i].transition_description, full[i].transition_description);
    }
}

TEST(Reasoner, LevelProfiles) {
    const auto& model = *sami();
    const auto t = PromptTemplates::defaults();
    const ClassifierVerdict v{QuestionClass::mmodel, 2};

    const auto bare = build_reason_prompt("What do you do?", v, {}, model, tmk::degrade(model, tmk::DegradationLevel(6)), t);
    EXPECT_EQ(bare.request.user_text, "What do you do?");
    EXPECT_TRUE(bare.request.system_text.empty());

    const auto l5 = build_reason_prompt("What do you do?", v, {}, model, tmk::degrade(model, tmk::DegradationLevel(5)), t);
    EXPECT_NE(l5.request.user_text.find("- [overview] " + model.overview), std::string::npos);

    const auto l4 = build_reason_prompt("What do you do?", v, {}, model, tmk::degrade(model, tmk::DegradationLevel(4)), t);
    EXPECT_EQ(l4.request.user_text, render(t.reason_no_material, {{"question", "What do you do?"},
                                                                   {"agent_name", model.agent_name},
                                                                   {"verbosity", verbosity_instruction(2)},
                                                                   {"k", "2"},
                                                                   {"overview", ""},
                                                                   {"snippets", ""},
                                                                   {"cot_steps", ""}}));
    EXPECT_EQ(l4.request.system_text.find(model.overview), std::string::npos);
}

// ---------------------------------------------------------------------------
// pipeline

TEST(Pipeline, AnswersAMatchQuestion) {
    const auto p = ExplainPipeline::at_level(sami(), tmk::DegradationLevel(0), sami_mock());
    const auto r = p.explain("What is a match?");
    EXPECT_EQ(r.verdict, (ClassifierVerdict{QuestionClass::multimodel, 5}));
    EXPECT_EQ(r.used_snippets.size(), 5u);
    EXPECT_NE(r.answer.find("A match is"), std::string::npos);
    EXPECT_EQ(r.trace_id.rfind("tr-", 0), 0u);
    EXPECT_NE(r.prompt.find("Question: What is a match?"), std::string::npos);
}

TEST(Pipeline, CantAnswerRefuses) {
    const auto p = ExplainPipeline::at_level(sami(), tmk::DegradationLevel(0), sami_mock());
    const auto r = p.explain("Can you solve the halting problem?");
    EXPECT_EQ(r.verdict.question_class, QuestionClass::cant_answer);
    EXPECT_TRUE(r.used_snippets.empty());
    EXPECT_TRUE(r.prompt.empty());
    EXPECT_EQ(r.answer, p.refusal());
    EXPECT_NE(p.refusal().find("SAMI"), std::string::npos);
}

TEST(Pipeline, TraceIdsAreUnique) {
    const auto p = ExplainPipeline::at_level(sami(), tmk::DegradationLevel(0), sami_mock());
    std::set<std::string> ids;
    for (int i = 0; i < 20; ++i) ids.insert(p.explain("What is SAMI?").trace_id);
    EXPECT_EQ(ids.size(), 20u);
}

TEST(Pipeline, BlankQuestionRejected) {
    const auto p = ExplainPipeline::at_level(sami(), tmk::DegradationLevel(0), sami_mock());
    EXPECT_THROW(p.explain(""), std::invalid_argument);
    EXPECT_THROW(p.explain(" \n\t"), std::invalid_argument);
}

TEST(Pipeline, ProviderFailureCarriesTrace) {
    const auto p = ExplainPipeline::at_level(sami(), tmk::DegradationLevel(0), std::make_shared<FailingProvider>());
    try {
        p.explain("What is a match?");
        FAIL();
    } catch (const ExplainError& e) {
        EXPECT_EQ(e.trace_id().rfind("tr-", 0), 0u);
        EXPECT_EQ(e.kind(), llm::ProviderErrorKind::exhausted_retries);
        EXPECT_EQ(e.http_status(), 503);
        EXPECT_NE(std::string(e.what()).find(e.trace_id()), std::string::npos);
    }
}

TEST(Pipeline, SampleIndexReachesProvider) {
    const auto p = ExplainPipeline::at_level(
        sami(), tmk::DegradationLevel(0),
        std::make_shared<llm::ScriptedMock>(llm::ScriptedMock::load(data_path("mock/parity.mock.jsonl"))));
    const auto a = p.explain("What do you do?", {0}).answer;
    const auto b = p.explain("What do you do?", {1}).answer;
    EXPECT_NE(a, b);
    EXPECT_EQ(a, p.explain("What do you do?", {2}).answer);
}

TEST(Pipeline, ClassifiesAtEveryLevel) {
    for (int level = 0; level <= 6; ++level) {
        auto prov = std::make_shared<ListProvider>(std::vector<std::string>{"kmodel, k=2", "answer"});
        const auto p = ExplainPipeline::at_level(sami(), tmk::DegradationLevel(level), prov);
        const auto r = p.explain("Where are you?");
        EXPECT_EQ(r.answer, "answer");
        EXPECT_EQ(prov->seen.size(), 2u) << level;
        if (level >= 4) {
            EXPECT_TRUE(r.used_snippets.empty()) << level;
        }
    }
}

TEST(Pipeline, RejectsNullCollaborators) {
    EXPECT_THROW(ExplainPipeline(nullptr, {}, sami_mock()), std::invalid_argument);
    EXPECT_THROW(ExplainPipeline(sami(), {}, nullptr), std::invalid_argument);
}
