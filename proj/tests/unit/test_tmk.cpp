#include <selfex/tmk/degrade.hpp>
#include <selfex/tmk/dot.hpp>
#include <selfex/tmk/json_io.hpp>
#include <selfex/tmk/layers.hpp>
#include <selfex/tmk/snippets.hpp>
#include <selfex/tmk/validate.hpp>
#include <selfex/tmk/walk.hpp>

#include "generators.hpp"
#include "paths.hpp"

#include <gtest/gtest.h>

#include <regex>
#include <sstream>

using namespace selfex;
using namespace selfex::tmk;
using selfex::testing::data_path;

namespace {

const TmkModel& sami() {
    static const TmkModel m = load_model(data_path("models/sami-mini.tmk.json"));
    return m;
}

ModelError parse_error(const std::string& text) {
    try {
        parse_model(text);
    } catch (const ModelError& e) {
        return e;
    }
    throw std::logic_error("document parsed without error");
}

const char* kTiny = R"({
  "agent_name": "Tiny", "overview": "Tiny does one thing.", "root_task": "root",
  "tasks": {"root": {"name": "Root", "description": "Do it.", "achieved_by": ["m"]},
            "leaf": {"name": "Leaf", "description": "Part of it.", "achieved_by": []}},
  "methods": {"m": {"name": "M", "description": "How.", "parent_task": "root",
                    "states": ["a", "b"], "start_state": "a", "terminal_states": ["b"],
                    "transitions": [{"from": "a", "to": "b", "description": "go",
                                     "annotation": {"kind": "task", "ref": "leaf"}}]}},
  "knowledge": {"fact": {"name": "fact", "description": "A fact.", "properties": {"p": "a property"}}}
})";

}  // namespace

// ---------------------------------------------------------------------------
// parse / serialize

TEST(ModelIo, SamiMiniRootAndKnowledge) {
    const auto& m = sami();
    EXPECT_EQ(m.tasks.at(m.root_task).name, "Mediate social interaction among opted-in students");
    std::set<std::string> names;
    for (const auto& [_, k] : m.knowledge) names.insert(k.name);
    EXPECT_EQ(names, (std::set<std::string>{"location", "hobbies", "specialization", "classes taken", "timezone"}));
    EXPECT_EQ(m.methods.at(MethodId{"rg-process"}).name, "RG process");
}

TEST(ModelIo, RoundTripOnEveryFixture) {
    for (auto name : {"sami-mini", "minimal", "linear", "branch-loop", "two-path"}) {
        const auto m = load_model(data_path(std::string("models/") + name + ".tmk.json"));
        const auto text = serialize_model(m);
        EXPECT_EQ(parse_model(text), m) << name;
        EXPECT_EQ(serialize_model(parse_model(text)), text) << name;
    }
}

TEST(ModelIo, RoundTripOnRandomModels) {
    std::mt19937_64 rng(11);
    for (int i = 0; i < 50; ++i) {
        const auto m = selfex::testing::random_model(rng);
        EXPECT_EQ(parse_model(serialize_model(m)), m) << "model " << i;
    }
}

TEST(ModelIo, SyntaxErrorReportsLineAndColumn) {
    auto e = parse_error("{\n  \"agent_name\": \"x\",\n  oops\n}");
    EXPECT_EQ(e.kind(), ModelErrorKind::syntax);
    EXPECT_EQ(e.line(), 3u);
    EXPECT_GE(e.column(), 3u);
}

TEST(ModelIo, MissingFieldIsSchemaError) {
    std::string doc = kTiny;
    doc.replace(doc.find("\"overview\""), std::string("\"overview\"").size(), "\"summary\"");
    auto e = parse_error(doc);
    EXPECT_EQ(e.kind(), ModelErrorKind::schema);
    EXPECT_NE(std::string(e.what()).find("overview"), std::string::npos);
}

TEST(ModelIo, DuplicateTaskKeyIsDuplicateId) {
    std::string doc = kTiny;
    doc.replace(doc.find("\"leaf\": {"), 6, "\"root\"");
    auto e = parse_error(doc);
    EXPECT_EQ(e.kind(), ModelErrorKind::duplicate_id);
    EXPECT_EQ(e.subject(), "root");
}

TEST(ModelIo, IdSharedAcrossSectionsIsDuplicateId) {
    std::string doc = kTiny;
    doc.replace(doc.find("\"fact\": {"), 6, "\"leaf\"");
    auto e = parse_error(doc);
    EXPECT_EQ(e.kind(), ModelErrorKind::duplicate_id);
    EXPECT_EQ(e.subject(), "leaf");
}

TEST(ModelIo, DanglingAnnotationIsRejected) {
    std::string doc = kTiny;
    doc.replace(doc.find("\"ref\": \"leaf\""), 13, "\"ref\": \"ghost\"");
    auto e = parse_error(doc);
    EXPECT_EQ(e.kind(), ModelErrorKind::dangling_reference);
    EXPECT_EQ(e.subject(), "ghost");
}

TEST(ModelIo, NonKebabIdIsSchemaError) {
    std::string doc = kTiny;
    doc.replace(doc.find("\"fact\": {"), 6, "\"Fact_1\"");
    EXPECT_EQ(parse_error(doc).kind(), ModelErrorKind::schema);
}

TEST(ModelIo, UnknownAnnotationKind) {
    std::string doc = kTiny;
    doc.replace(doc.find("\"kind\": \"task\""), 14, "\"kind\": \"goal\"");
    EXPECT_EQ(parse_error(doc).kind(), ModelErrorKind::schema);
}

TEST(ModelIo, MissingFileIsIoError) {
    try {
        load_model("/nonexistent/model.tmk.json");
        FAIL();
    } catch (const ModelError& e) {
        EXPECT_EQ(e.kind(), ModelErrorKind::io);
    }
}

// ---------------------------------------------------------------------------
// validate

TEST(Validate, CleanFixturesHaveNoViolations) {
    for (auto name : {"sami-mini", "minimal", "linear", "branch-loop", "two-path"}) {
        const auto report = validate(load_model(data_path(std::string("models/") + name + ".tmk.json")));
        EXPECT_TRUE(report.ok()) << name << ": " << (report.ok() ? "" : report.violations.front().detail);
    }
}

TEST(Validate, RandomModelsAreValid) {
    std::mt19937_64 rng(5);
    for (int i = 0; i < 100; ++i) {
        auto report = validate(selfex::testing::random_model(rng));
        ASSERT_TRUE(report.ok()) << report.violations.front().rule << " " << report.violations.front().detail;
    }
}

TEST(Validate, UnreachableState) {
    auto m = sami();
    m.methods.at(MethodId{"introduction"}).states.push_back("orphan");
    const auto r = validate(m);
    ASSERT_EQ(r.count(rule::unreachable_state), 1u);
    EXPECT_EQ(r.violations.front().node_id, "introduction");
}

TEST(Validate, CycleIsReportedOncePerComponent) {
    auto m = sami();
    // sort-candidates (layer 6) gets a method that calls back up to build-student-profile.
    Method back{MethodId{"loop-back"}, "Loop back", "Calls an ancestor.", TaskId{"sort-candidates"},
                {"a", "b"}, "a", {"b"}, {Transition{"a", "b", SubtaskRef{TaskId{"build-student-profile"}}, "up"}}};
    m.methods.emplace(back.id, back);
    m.tasks.at(TaskId{"sort-candidates"}).achieved_by.push_back(back.id);
    const auto r = validate(m);
    EXPECT_EQ(r.count(rule::decomposition_cycle), 1u);
    EXPECT_THROW(compute_layers(m), CycleError);
}

TEST(Validate, SelfLoopTaskIsACycle) {
    auto m = sami();
    auto& t = m.methods.at(MethodId{"rank-selection"}).transitions.front();
    t.annotation = SubtaskRef{TaskId{"rank-terms"}};
    const auto r = validate(m);
    ASSERT_EQ(r.count(rule::decomposition_cycle), 1u);
    EXPECT_TRUE(r.names("rank-terms"));
}

TEST(Validate, DetachedTask) {
    auto m = sami();
    m.tasks.emplace(TaskId{"stray"}, Task{TaskId{"stray"}, "Stray", "Nobody calls this.", {}});
    const auto r = validate(m);
    ASSERT_EQ(r.count(rule::detached_node), 1u);
    EXPECT_TRUE(r.names("stray"));
}

TEST(Validate, DuplicateKnowledgeName) {
    auto m = sami();
    m.knowledge.at(KnowledgeId{"timezone"}).name = "location";
    EXPECT_EQ(validate(m).count(rule::duplicate_knowledge_name), 1u);
}

TEST(Validate, NoReachableTerminal) {
    auto m = sami();
    auto& meth = m.methods.at(MethodId{"introduction"});
    meth.states.push_back("limbo");
    meth.terminal_states = {"limbo"};
    const auto r = validate(m);
    EXPECT_EQ(r.count(rule::no_reachable_terminal), 1u);
}

TEST(Validate, IdMismatch) {
    auto m = sami();
    m.tasks.at(TaskId{"collect-opt-in"}).id = TaskId{"something-else"};
    EXPECT_TRUE(validate(m).names("collect-opt-in"));
}

// ---------------------------------------------------------------------------
// layers

TEST(Layers, SamiMiniHandTable) {
    const LayerMap expected{
        {"mediate-social-interaction", 0}, {"rg-process", 0},
        {"collect-opt-in", 1}, {"build-student-profile", 1}, {"find-matches", 1}, {"introduce-students", 1},
        {"profile-extraction", 1}, {"matchmaking", 1}, {"introduction", 1},
        {"parse-introduction-post", 2}, {"normalize-attributes", 2}, {"compare-profiles", 2},
        {"filter-by-timezone", 2}, {"draft-introduction", 2}, {"post-introduction", 2},
        {"attribute-normalization", 2}, {"forum-posting", 2},
        {"resolve-location", 3}, {"map-specialization", 3}, {"specialization-mapping", 3},
        {"tokenize-specialization", 4}, {"score-specialization-terms", 4}, {"term-scoring", 4},
        {"weigh-terms", 5}, {"rank-terms", 5}, {"rank-selection", 5},
        {"sort-candidates", 6}};
    const auto layers = compute_layers(sami());
    EXPECT_EQ(layers, expected);
    EXPECT_EQ(max_layer(layers), 6);
}

TEST(Layers, ShallowestPathWins) {
    const auto layers = compute_layers(load_model(data_path("models/two-path.tmk.json")));
    EXPECT_EQ(layers.at("cook-meal"), 0);
    EXPECT_EQ(layers.at("prepare"), 1);
    EXPECT_EQ(layers.at("prep"), 1);
    EXPECT_EQ(layers.at("shared-step"), 1);  // also reachable at 2 through prep
    EXPECT_EQ(layers.at("chop"), 2);
}

TEST(Layers, MinimalModel) {
    const auto layers = compute_layers(load_model(data_path("models/minimal.tmk.json")));
    EXPECT_EQ(layers, (LayerMap{{"repeat", 0}}));
}

TEST(Layers, MethodSharesParentLayerOnRandomModels) {
    std::mt19937_64 rng(3);
    for (int i = 0; i < 50; ++i) {
        const auto m = selfex::testing::random_model(rng);
        const auto layers = compute_layers(m);
        for (const auto& [id, method] : m.methods) {
            EXPECT_EQ(layers.at(id.str()), layers.at(method.parent_task.str()));
            for (const auto& sub : subtasks_of(method)) EXPECT_LE(layers.at(sub.str()), layers.at(id.str()) + 1);
        }
    }
}

// ---------------------------------------------------------------------------
// snippets and degradation

TEST(Snippets, OnePerNode) {
    const auto& m = sami();
    EXPECT_EQ(snippets(m).size(), m.tasks.size() + m.methods.size() + m.knowledge.size());
}

TEST(Snippets, MethodTextListsStepsInWalkOrder) {
    const auto all = snippets(load_model(data_path("models/linear.tmk.json")));
    const auto it = std::find_if(all.begin(), all.end(), [](const Snippet& s) { return s.source_id == "brew"; });
    ASSERT_NE(it, all.end());
    EXPECT_EQ(it->text, "Brew: Boil, steep, pour. Steps: 1. Boil water; 2. Steep leaves; 3. Pour cup.");
}

TEST(Snippets, KnowledgeTextListsProperties) {
    const auto all = snippets(load_model(data_path("models/linear.tmk.json")));
    const auto it = std::find_if(all.begin(), all.end(), [](const Snippet& s) { return s.part == Part::knowledge; });
    ASSERT_NE(it, all.end());
    EXPECT_EQ(it->text, "kettle: Holds up to one litre. Properties: capacity (One litre).");
    EXPECT_EQ(it->layer, 0);
}

TEST(Degrade, CountsPerLevelOnSamiMini) {
    const std::vector<std::size_t> expected{32, 25, 14, 7, 0, 0, 0};
    for (int l = 0; l <= 6; ++l) EXPECT_EQ(degrade(sami(), DegradationLevel{l}).snippets.size(), expected[l]) << l;
}

TEST(Degrade, Level1DropsDeepNodesKeepsKnowledge) {
    const auto l0 = degrade(sami(), DegradationLevel{0});
    const auto l1 = degrade(sami(), DegradationLevel{1});
    auto count = [](const DegradedContext& c, Part p) {
        return std::count_if(c.snippets.begin(), c.snippets.end(), [p](const Snippet& s) { return s.part == p; });
    };
    EXPECT_LT(count(l1, Part::task) + count(l1, Part::method), count(l0, Part::task) + count(l0, Part::method));
    EXPECT_EQ(count(l1, Part::knowledge), count(l0, Part::knowledge));
    for (const auto& s : l1.snippets) {
        if (s.part != Part::knowledge) {
            EXPECT_LE(s.layer, 3);
        }
    }
}

TEST(Degrade, ProfilesAndOverview) {
    for (int l = 0; l <= 6; ++l) {
        const auto c = degrade(sami(), DegradationLevel{l});
        EXPECT_EQ(c.prompt_profile, l >= 4 ? PromptProfile::no_inner_workings : PromptProfile::full) << l;
        EXPECT_EQ(c.overview_only, l == 5) << l;
        EXPECT_EQ(c.bare(), l == 6) << l;
    }
    const auto five = degrade(sami(), DegradationLevel{5});
    EXPECT_TRUE(five.snippets.empty());
    EXPECT_EQ(five.overview, sami().overview);
    const auto six = degrade(sami(), DegradationLevel{6});
    EXPECT_TRUE(six.snippets.empty());
    EXPECT_TRUE(six.overview.empty());
}

TEST(Degrade, LevelOutOfRange) {
    EXPECT_THROW(DegradationLevel{7}, std::out_of_range);
    EXPECT_THROW(DegradationLevel{-1}, std::out_of_range);
}

TEST(Degrade, MonotoneOnRandomModels) {
    std::mt19937_64 rng(17);
    for (int i = 0; i < 50; ++i) {
        const auto m = selfex::testing::random_model(rng);
        std::size_t prev = SIZE_MAX;
        for (int l = 0; l <= 6; ++l) {
            const auto n = degrade(m, DegradationLevel{l}).snippets.size();
            EXPECT_LE(n, prev);
            prev = n;
        }
    }
}

// ---------------------------------------------------------------------------
// walk

TEST(Walk, BranchLoopOrder) {
    const auto m = load_model(data_path("models/branch-loop.tmk.json"));
    const auto steps = fsm_walk(m.methods.at(MethodId{"badge-check"}), m);
    ASSERT_EQ(steps.size(), 4u);
    EXPECT_EQ(steps[0].from_state + ">" + steps[0].to_state, "idle>read");
    EXPECT_EQ(steps[1].to_state, "open");
    EXPECT_EQ(steps[2].to_state, "rejected");
    EXPECT_EQ(steps[3].from_state + ">" + steps[3].to_state, "rejected>idle");
    EXPECT_EQ(steps[2].annotation_text, "allow list: Badge numbers permitted to enter.");
    EXPECT_EQ(steps[3].step_index, 4);
}

TEST(Walk, EveryTransitionOnceOnRandomMethods) {
    std::mt19937_64 rng(23);
    for (int i = 0; i < 200; ++i) {
        const auto m = selfex::testing::random_method_model(rng);
        const auto& method = m.methods.begin()->second;
        auto order = walk_order(method);
        ASSERT_EQ(order.size(), method.transitions.size());
        std::sort(order.begin(), order.end());
        EXPECT_EQ(std::adjacent_find(order.begin(), order.end()), order.end());
    }
}

// ---------------------------------------------------------------------------
// dot

TEST(Dot, NodeCountIsTasksPlusStates) {
    for (auto name : {"sami-mini", "linear", "branch-loop", "two-path", "minimal"}) {
        const auto m = load_model(data_path(std::string("models/") + name + ".tmk.json"));
        const auto dot = export_dot(m);
        std::size_t states = 0;
        for (const auto& [_, meth] : m.methods) states += meth.states.size();
        const std::regex node_stmt(R"(\s*"(task|state):[^"]*" \[.*)");
        std::size_t n = 0;
        std::istringstream lines(dot);
        for (std::string line; std::getline(lines, line);) n += std::regex_match(line, node_stmt) ? 1 : 0;
        EXPECT_EQ(n, m.tasks.size() + states) << name;
        EXPECT_EQ(dot.rfind("digraph", 0), 0u);
        EXPECT_EQ(dot.back(), '\n');
    }
}

TEST(Dot, QuotesSpecialCharacters) {
    auto m = load_model(data_path("models/minimal.tmk.json"));
    m.tasks.begin()->second.name = "Say \"hi\"";
    EXPECT_NE(export_dot(m).find(R"(Say \"hi\")"), std::string::npos);
}
