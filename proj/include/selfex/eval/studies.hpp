/**
 * @file studies.hpp
 * @brief Correctness/completeness, precision and ablation studies.
 *
 * Each study drives an ExplainPipeline (or one pipeline per degradation
 * level) and returns a report value; formatting and persistence live in
 * reports.hpp. Failures of individual asks are recorded and never abort a
 * study, with one exception: an ablation level where every ask fails stops
 * the study and returns what was gathered so far.
 */

#pragma once

#include <selfex/eval/question_bank.hpp>
#include <selfex/eval/run_log.hpp>
#include <selfex/eval/stats.hpp>
#include <selfex/explain/pipeline.hpp>
#include <selfex/retrieval/tfidf.hpp>
#include <selfex/tmk/degrade.hpp>

#include <algorithm>
#include <cctype>
#include <atomic>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace selfex::eval {

// ---------------------------------------------------------------------------
// Correctness and completeness

struct TranscriptEntry {
    std::string question;
    Category category = Category::others;
    std::string answer;
    std::string trace_id;
    std::string question_class;
    int k = 0;
    std::optional<std::string> error;
};

/// Asks every bank question once.
inline std::vector<TranscriptEntry> run_correctness_study(const QuestionBank& bank,
                                                          const explain::ExplainPipeline& pipeline,
                                                          RunLog* log = nullptr) {
    if (bank.empty()) throw std::invalid_argument("question bank is empty");
    std::vector<TranscriptEntry> out;
    for (const auto& entry : bank.entries()) {
        TranscriptEntry t{entry.question, entry.category, {}, {}, {}, 0, std::nullopt};
        const std::string key = "correctness#" + entry.question;
        if (log) {
            if (auto cached = log->find(key)) {
                t.answer = *cached;
                out.push_back(std::move(t));
                continue;
            }
        }
        try {
            auto r = pipeline.explain(entry.question);
            t.answer = r.answer;
            t.trace_id = r.trace_id;
            t.question_class = std::string(explain::to_string(r.verdict.question_class));
            t.k = r.verdict.k;
            if (log) log->record(key, {{"study", "correctness"}, {"question", entry.question}}, t.answer);
        } catch (const std::exception& e) {
            t.error = e.what();
            if (log) log->record_error(key, {{"study", "correctness"}, {"question", entry.question}}, e.what());
        }
        out.push_back(std::move(t));
    }
    return out;
}

struct CategoryTally {
    int questions = 0;
    int judged = 0;
    int complete = 0;
    int incomplete = 0;
    int correct = 0;
    int partial = 0;
    int incorrect = 0;
    int correct_and_complete = 0;

    void add(const Judgment& j) {
        ++judged;
        (j.completeness == Completeness::complete ? complete : incomplete) += 1;
        switch (j.correctness) {
            case Correctness::yes: ++correct; break;
            case Correctness::partial: ++partial; break;
            case Correctness::no: ++incorrect; break;
        }
        if (j.correctness == Correctness::yes && j.completeness == Completeness::complete) ++correct_and_complete;
    }
};

struct CorrectnessSummary {
    std::map<Category, CategoryTally> rows;
    CategoryTally total;
};

/// Tallies judgments per bank category. Throws on judgments for questions
/// not in the bank or judged twice.
inline CorrectnessSummary summarize_correctness(const QuestionBank& bank, const std::vector<Judgment>& judgments) {
    CorrectnessSummary s;
    for (Category c : all_categories) s.rows[c] = {};
    for (const auto& e : bank.entries()) {
        ++s.rows[e.category].questions;
        ++s.total.questions;
    }
    std::set<std::string> seen;
    for (const auto& j : judgments) {
        const BankEntry* e = bank.find(j.question);
        if (!e) throw std::invalid_argument("judgment for a question not in the bank: " + j.question);
        if (!seen.insert(j.question).second) throw std::invalid_argument("question judged twice: " + j.question);
        s.rows[e->category].add(j);
        s.total.add(j);
    }
    return s;
}

// ---------------------------------------------------------------------------
// Precision

/// Trims and collapses runs of whitespace to one space.
inline std::string normalize_whitespace(std::string_view s) {
    std::string out;
    bool pending_space = false;
    for (unsigned char c : s) {
        if (std::isspace(c)) {
            pending_space = !out.empty();
            continue;
        }
        if (pending_space) out += ' ';
        pending_space = false;
        out += static_cast<char>(c);
    }
    return out;
}

struct DistinctAnswer {
    std::string answer;
    int count = 0;
};

struct PrecisionEntry {
    std::string question;
    int n_requested = 0;
    int n_runs = 0;  // successful runs; equals the sum of distinct counts
    int failures = 0;
    std::vector<DistinctAnswer> distinct;         // in order of first appearance
    std::vector<std::vector<double>> similarity;  // over distinct answers, unit diagonal
};

struct PrecisionReport {
    std::vector<PrecisionEntry> entries;
    int failures = 0;
};

/// Groups run answers (nullopt = failed run) and scores every distinct pair.
inline PrecisionEntry tally_answers(std::string question, const std::vector<std::optional<std::string>>& answers) {
    PrecisionEntry e;
    e.question = std::move(question);
    e.n_requested = static_cast<int>(answers.size());
    std::map<std::string, std::size_t> position;
    for (const auto& a : answers) {
        if (!a) {
            ++e.failures;
            continue;
        }
        ++e.n_runs;
        auto norm = normalize_whitespace(*a);
        auto [it, fresh] = position.emplace(norm, e.distinct.size());
        if (fresh) e.distinct.push_back({std::move(norm), 0});
        ++e.distinct[it->second].count;
    }
    const std::size_t n = e.distinct.size();
    e.similarity.assign(n, std::vector<double>(n, 1.0));
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            const double s = retrieval::answer_similarity(e.distinct[i].answer, e.distinct[j].answer);
            e.similarity[i][j] = e.similarity[j][i] = s;
        }
    }
    return e;
}

struct PrecisionOptions {
    int workers = 1;
    RunLog* log = nullptr;
};

/// Asks each question n times. Run i uses sample index i, so results do not
/// depend on the order in which concurrent runs finish.
inline PrecisionReport run_precision_study(const std::vector<std::string>& questions, int n,
                                           const explain::ExplainPipeline& pipeline, PrecisionOptions options = {}) {
    if (n < 2) throw std::invalid_argument("precision study needs n >= 2");
    PrecisionReport report;
    for (const auto& q : questions) {
        std::vector<std::optional<std::string>> answers(static_cast<std::size_t>(n));
        std::atomic<int> next{0};
        auto worker = [&] {
            for (int i = next++; i < n; i = next++) {
                const std::string key = "precision#" + q + "#" + std::to_string(i);
                if (options.log) {
                    if (auto cached = options.log->find(key)) {
                        answers[static_cast<std::size_t>(i)] = *cached;
                        continue;
                    }
                }
                const nlohmann::json meta{{"study", "precision"}, {"question", q}, {"run", i}};
                try {
                    auto r = pipeline.explain(q, {static_cast<std::uint64_t>(i)});
                    answers[static_cast<std::size_t>(i)] = r.answer;
                    if (options.log) options.log->record(key, meta, r.answer);
                } catch (const std::exception& e) {
                    if (options.log) options.log->record_error(key, meta, e.what());
                }
            }
        };
        const int workers = std::clamp(options.workers, 1, n);
        if (workers == 1) {
            worker();
        } else {
            std::vector<std::jthread> pool;
            for (int w = 0; w < workers; ++w) pool.emplace_back(worker);
        }
        auto entry = tally_answers(q, answers);
        report.failures += entry.failures;
        report.entries.push_back(std::move(entry));
    }
    return report;
}

// ---------------------------------------------------------------------------
// Ablation

using PipelineFactory = std::function<std::shared_ptr<const explain::ExplainPipeline>(tmk::DegradationLevel)>;

struct LevelPairTest {
    int from = 0;
    int to = 0;
    TTestResult test;
    bool significant = false;
};

struct AblationReport {
    std::vector<std::string> questions;
    std::map<std::string, std::string> baseline_answers;
    std::map<int, std::vector<double>> similarity;  // level 1..6 -> one score per question
    std::map<int, int> failures;                    // level 0..6 -> failed asks
    std::vector<LevelPairTest> tests;
    bool aborted = false;
    std::string abort_reason;

    double mean_similarity(int level) const {
        const auto& xs = similarity.at(level);
        double sum = 0.0;
        for (double x : xs) sum += x;
        return xs.empty() ? 0.0 : sum / static_cast<double>(xs.size());
    }
};

struct AblationOptions {
    double alpha = 0.05;
    RunLog* log = nullptr;
};

inline void check_level6_context(const tmk::DegradedContext& ctx) {
    if (!ctx.snippets.empty() || ctx.overview_only || !ctx.overview.empty()) {
        throw std::logic_error("level 6 pipeline still carries self-model content");
    }
}

/// Baseline answers at level 0, then per level 1..6 the similarity of each
/// answer to its baseline, then paired t-tests on consecutive levels
/// (1,2) .. (5,6). A failed ask counts as an empty answer (similarity 0).
inline AblationReport run_ablation_study(const std::vector<std::string>& questions, const PipelineFactory& factory,
                                         AblationOptions options = {}) {
    if (questions.size() < 2) throw std::invalid_argument("ablation study needs at least two questions");
    AblationReport report;
    report.questions = questions;

    auto ask_all = [&](int level) {
        auto pipeline = factory(tmk::DegradationLevel{level});
        if (!pipeline) throw std::invalid_argument("factory returned no pipeline for level " + std::to_string(level));
        if (level == tmk::DegradationLevel::max) check_level6_context(pipeline->context());
        std::vector<std::string> answers;
        int failed = 0;
        for (const auto& q : questions) {
            const std::string key = "ablation#" + std::to_string(level) + "#" + q;
            if (options.log) {
                if (auto cached = options.log->find(key)) {
                    answers.push_back(*cached);
                    continue;
                }
            }
            const nlohmann::json meta{{"study", "ablation"}, {"level", level}, {"question", q}};
            try {
                answers.push_back(pipeline->explain(q).answer);
                if (options.log) options.log->record(key, meta, answers.back());
            } catch (const std::exception& e) {
                ++failed;
                answers.emplace_back();
                if (options.log) options.log->record_error(key, meta, e.what());
            }
        }
        report.failures[level] = failed;
        if (failed == static_cast<int>(questions.size())) {
            report.aborted = true;
            report.abort_reason = "every question failed at level " + std::to_string(level);
        }
        return answers;
    };

    const auto baseline = ask_all(0);
    for (std::size_t i = 0; i < questions.size(); ++i) report.baseline_answers[questions[i]] = baseline[i];
    if (report.aborted) return report;

    for (int level = 1; level <= tmk::DegradationLevel::max; ++level) {
        const auto answers = ask_all(level);
        if (report.aborted) return report;
        auto& scores = report.similarity[level];
        for (std::size_t i = 0; i < questions.size(); ++i) {
            scores.push_back(retrieval::answer_similarity(answers[i], baseline[i]));
        }
    }

    for (int level = 1; level < tmk::DegradationLevel::max; ++level) {
        LevelPairTest pair{level, level + 1, paired_t_test(report.similarity.at(level), report.similarity.at(level + 1)),
                           false};
        pair.significant = pair.test.p && *pair.test.p < options.alpha;
        report.tests.push_back(pair);
    }
    return report;
}

}  // namespace selfex::eval
