// Answers a few questions about the bundled SAMI model with the scripted
// mock provider, at full detail and again with only the overview left.
//
//   explain_offline [question...]

#include <selfex/explain/pipeline.hpp>
#include <selfex/llm/scripted_mock.hpp>
#include <selfex/tmk/json_io.hpp>

#include <filesystem>
#include <iostream>

namespace fs = std::filesystem;
using namespace selfex;

int main(int argc, char** argv) {
    const fs::path data = SELFEX_DATA_DIR;
    auto model = std::make_shared<const tmk::TmkModel>(tmk::load_model(data / "models/sami-mini.tmk.json"));
    auto provider = std::make_shared<llm::ScriptedMock>(llm::ScriptedMock::load(data / "mock/sami.mock.jsonl"));

    std::vector<std::string> questions{"What is a match?", "What hobbies do you look at?",
                                       "Can you solve the halting problem?"};
    if (argc > 1) questions.assign(argv + 1, argv + argc);

    for (int level : {0, 5}) {
        const auto pipeline = explain::ExplainPipeline::at_level(model, tmk::DegradationLevel(level), provider);
        std::cout << "== level " << level << " (" << pipeline.context().snippets.size() << " snippets)\n";
        for (const auto& q : questions) {
            const auto r = pipeline.explain(q);
            std::cout << "Q: " << q << "\n"
                      << "   class " << explain::to_string(r.verdict.question_class) << ", k=" << r.verdict.k;
            for (const auto& s : r.used_snippets) std::cout << " [" << s.snippet.source_id << "]";
            if (r.walked_method) std::cout << "\n   walked " << r.walked_method->str() << " in " << r.cot_steps.size()
                                           << " steps";
            std::cout << "\nA: " << r.answer << "\n\n";
        }
    }
}
