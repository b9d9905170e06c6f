#pragma once

#include <selfex/explain/classifier.hpp>
#include <selfex/retrieval/tfidf.hpp>

#include <stdexcept>
#include <string_view>
#include <vector>

namespace selfex::explain {

/// Model parts a question class may draw from; empty for cant_answer.
inline const retrieval::PartSet& permitted_parts(QuestionClass c) {
    using tmk::Part;
    static const retrieval::PartSet knowledge{Part::knowledge};
    static const retrieval::PartSet task_method{Part::task, Part::method};
    static const retrieval::PartSet none{};
    switch (c) {
        case QuestionClass::kmodel: return knowledge;
        case QuestionClass::mmodel: return task_method;
        case QuestionClass::multimodel: return retrieval::all_parts();
        case QuestionClass::cant_answer: return none;
    }
    return none;
}

/// Top-k search restricted to the parts the verdict allows.
inline std::vector<retrieval::ScoredSnippet> localize(const ClassifierVerdict& verdict, std::string_view question,
                                                      const retrieval::SnippetIndex& index) {
    if (verdict.question_class == QuestionClass::cant_answer) {
        throw std::invalid_argument("cannot localize a cant_answer question");
    }
    if (index.empty()) return {};
    return retrieval::search(index, question, verdict.k, permitted_parts(verdict.question_class));
}

}  // namespace selfex::explain
