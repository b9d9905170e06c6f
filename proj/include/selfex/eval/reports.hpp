#pragma once

#include <selfex/eval/question_bank.hpp>
#include <selfex/eval/studies.hpp>

#include <nlohmann/json.hpp>

#include <cstdio>
#include <iomanip>
#include <sstream>
#include <string>
#include <vector>

namespace selfex::eval {

namespace detail {

inline std::string fixed(double v, int digits) {
    std::ostringstream out;
    out << std::fixed << std::setprecision(digits) << v;
    return out.str();
}

inline std::string pad(std::string s, std::size_t width) {
    if (s.size() < width) s.append(width - s.size(), ' ');
    return s;
}

inline std::string frac(int num, int den) { return std::to_string(num) + "/" + std::to_string(den); }

}  // namespace detail

/// Category table with question counts, completeness and correctness
/// tallies, followed by overall totals.
inline std::string format_correctness_table(const CorrectnessSummary& s) {
    using detail::frac;
    using detail::pad;
    std::ostringstream out;
    out << pad("Category", 18) << pad("# Questions", 13) << pad("Completeness", 34) << "Correctness\n";
    auto row = [&](std::string_view name, const CategoryTally& t) {
        std::string completeness =
            "Complete " + frac(t.complete, t.questions) + ", Incomplete " + frac(t.incomplete, t.questions);
        std::string correctness = "Correct " + frac(t.correct, t.questions) + ", Partially correct " +
                                  frac(t.partial, t.questions) + ", Incorrect " + frac(t.incorrect, t.questions);
        if (t.judged < t.questions) correctness += " (" + std::to_string(t.questions - t.judged) + " unjudged)";
        out << pad(std::string(name), 18) << pad(std::to_string(t.questions), 13) << pad(completeness, 34)
            << correctness << "\n";
    };
    for (const auto& [category, tally] : s.rows) row(display_name(category), tally);
    row("Total", s.total);
    out << "\nCorrect: " << frac(s.total.correct, s.total.questions)
        << "; correct and complete: " << frac(s.total.correct_and_complete, s.total.questions)
        << "; complete: " << frac(s.total.complete, s.total.questions) << "\n";
    return out.str();
}

inline std::string transcript_jsonl(const std::vector<TranscriptEntry>& transcript) {
    std::string out;
    for (const auto& t : transcript) {
        nlohmann::json rec{{"question", t.question},
                           {"category", to_string(t.category)},
                           {"answer", t.answer},
                           {"trace_id", t.trace_id},
                           {"class", t.question_class},
                           {"k", t.k}};
        if (t.error) rec["error"] = *t.error;
        out += rec.dump() + "\n";
    }
    return out;
}

/// Unjudged judgments table for a transcript, ready for evaluators to fill
/// in the correctness, completeness and judge columns.
inline std::string judgment_sheet(const QuestionBank& bank, const std::vector<TranscriptEntry>& transcript) {
    std::string out = "question\tcategory\tsource\tcorrectness\tcompleteness\tjudge\tanswer\n";
    for (const auto& t : transcript) {
        const BankEntry* e = bank.find(t.question);
        out += tsv::escape(t.question) + "\t" + std::string(to_string(t.category)) + "\t" +
               (e ? std::string(to_string(e->source)) : "") + "\t\t\t\t" +
               tsv::escape(t.error ? "ERROR: " + *t.error : t.answer) + "\n";
    }
    return out;
}

inline std::string format_precision_summary(const PrecisionReport& r) {
    std::ostringstream out;
    int index = 0;
    for (const auto& e : r.entries) {
        out << "Q" << ++index << ": " << e.question << "\n";
        out << "  runs " << e.n_runs << "/" << e.n_requested << ", distinct answers " << e.distinct.size();
        if (e.failures) out << ", failures " << e.failures;
        out << "\n";
        for (std::size_t i = 0; i < e.distinct.size(); ++i) {
            out << "  [" << i + 1 << "] x" << e.distinct[i].count << "\n";
        }
        double lo = 1.0;
        for (std::size_t i = 0; i < e.similarity.size(); ++i) {
            for (std::size_t j = i + 1; j < e.similarity.size(); ++j) lo = std::min(lo, e.similarity[i][j]);
        }
        if (e.distinct.size() > 1) out << "  lowest pairwise similarity " << detail::fixed(lo, 4) << "\n";
    }
    if (r.failures) out << "warning: " << r.failures << " failed runs excluded\n";
    return out.str();
}

inline std::string precision_jsonl(const PrecisionReport& r) {
    std::string out;
    for (const auto& e : r.entries) {
        nlohmann::json distinct = nlohmann::json::array();
        for (const auto& d : e.distinct) distinct.push_back({{"answer", d.answer}, {"count", d.count}});
        out += nlohmann::json{{"question", e.question},
                              {"n_requested", e.n_requested},
                              {"n_runs", e.n_runs},
                              {"failures", e.failures},
                              {"distinct_answers", distinct},
                              {"pairwise_similarity", e.similarity}}
                   .dump() +
               "\n";
    }
    return out;
}

/// Pair | p-value | significance rows for consecutive degradation levels.
/// "**" marks p below the study's alpha.
inline std::string format_significance_table(const std::vector<LevelPairTest>& tests) {
    using detail::pad;
    std::ostringstream out;
    out << "Result of pair-wise t-tests\n";
    out << pad("Pair", 22) << pad("p-value", 22) << "Significance\n";
    for (const auto& t : tests) {
        const std::string pair = "Level " + std::to_string(t.from) + " to Level " + std::to_string(t.to);
        const std::string p = t.test.p ? detail::fixed(*t.test.p, 2) : "n/a (no variance)";
        out << pad(pair, 22) << pad(p, 22) << (t.significant ? "**" : "") << "\n";
    }
    return out.str();
}

inline std::string format_ablation_summary(const AblationReport& r) {
    std::ostringstream out;
    if (r.aborted) out << "ABORTED: " << r.abort_reason << "\n\n";
    out << "Mean similarity to the full-model answer\n";
    for (const auto& [level, scores] : r.similarity) {
        out << "  Level " << level << ": " << detail::fixed(r.mean_similarity(level), 4);
        if (auto it = r.failures.find(level); it != r.failures.end() && it->second) {
            out << " (" << it->second << " failed)";
        }
        out << "\n";
    }
    if (!r.tests.empty()) out << "\n" << format_significance_table(r.tests);
    return out.str();
}

inline nlohmann::json ablation_json(const AblationReport& r) {
    nlohmann::json levels = nlohmann::json::object();
    for (const auto& [level, scores] : r.similarity) levels[std::to_string(level)] = scores;
    nlohmann::json tests = nlohmann::json::array();
    for (const auto& t : r.tests) {
        nlohmann::json rec{{"pair", {t.from, t.to}}, {"df", t.test.df}, {"significant", t.significant}};
        rec["t"] = t.test.t ? nlohmann::json(*t.test.t) : nlohmann::json(nullptr);
        rec["p"] = t.test.p ? nlohmann::json(*t.test.p) : nlohmann::json(nullptr);
        if (t.test.no_variance()) rec["note"] = "no-variance, p undefined";
        tests.push_back(std::move(rec));
    }
    return {{"questions", r.questions},
            {"baseline_answers", r.baseline_answers},
            {"similarity", levels},
            {"tests", tests},
            {"aborted", r.aborted},
            {"abort_reason", r.abort_reason}};
}

}  // namespace selfex::eval
