/**
 * @file question_bank.hpp
 * @brief Question banks and human judgments as tab-separated tables.
 *
 * Both files start with a header row. Cells escape tab, newline and
 * backslash as \t, \n and \\. Lines starting with '#' are comments.
 *
 *   question  category  source
 *   question  category  source  correctness  completeness  judge  answer
 */

#pragma once

#include <array>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace selfex::eval {

enum class Category { input, output, how_global, why_not, others, others_context, agent_specific };
enum class Source { xai_bank, adapted, agent_specific };
enum class Correctness { yes, partial, no };
enum class Completeness { complete, incomplete };

inline constexpr std::array<Category, 7> all_categories{
    Category::input,  Category::output,         Category::how_global,    Category::why_not,
    Category::others, Category::others_context, Category::agent_specific};

inline std::string_view to_string(Category c) {
    switch (c) {
        case Category::input: return "input";
        case Category::output: return "output";
        case Category::how_global: return "how_global";
        case Category::why_not: return "why_not";
        case Category::others: return "others";
        case Category::others_context: return "others_context";
        case Category::agent_specific: return "agent_specific";
    }
    return "?";
}

/// Row label used in summary tables.
inline std::string_view display_name(Category c) {
    switch (c) {
        case Category::input: return "Input";
        case Category::output: return "Output";
        case Category::how_global: return "How (global)";
        case Category::why_not: return "Why not";
        case Category::others: return "Others";
        case Category::others_context: return "Others (context)";
        case Category::agent_specific: return "Agent specific";
    }
    return "?";
}

inline std::string_view to_string(Source s) {
    switch (s) {
        case Source::xai_bank: return "xai_bank";
        case Source::adapted: return "adapted";
        case Source::agent_specific: return "agent_specific";
    }
    return "?";
}

inline std::string_view to_string(Correctness c) {
    switch (c) {
        case Correctness::yes: return "yes";
        case Correctness::partial: return "partial";
        case Correctness::no: return "no";
    }
    return "?";
}

inline std::string_view to_string(Completeness c) {
    return c == Completeness::complete ? "complete" : "incomplete";
}

template <typename Enum, std::size_t N>
std::optional<Enum> parse_enum(std::string_view s, const std::array<Enum, N>& values) {
    for (Enum v : values) {
        if (to_string(v) == s) return v;
    }
    return std::nullopt;
}

inline std::optional<Category> parse_category(std::string_view s) { return parse_enum(s, all_categories); }
inline std::optional<Source> parse_source(std::string_view s) {
    return parse_enum(s, std::array{Source::xai_bank, Source::adapted, Source::agent_specific});
}
inline std::optional<Correctness> parse_correctness(std::string_view s) {
    return parse_enum(s, std::array{Correctness::yes, Correctness::partial, Correctness::no});
}
inline std::optional<Completeness> parse_completeness(std::string_view s) {
    return parse_enum(s, std::array{Completeness::complete, Completeness::incomplete});
}

namespace tsv {

inline std::string escape(std::string_view s) {
    std::string out;
    for (char c : s) {
        switch (c) {
            case '\t': out += "\\t"; break;
            case '\n': out += "\\n"; break;
            case '\r': out += "\\r"; break;
            case '\\': out += "\\\\"; break;
            default: out += c;
        }
    }
    return out;
}

inline std::string unescape(std::string_view s) {
    std::string out;
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (s[i] != '\\' || i + 1 == s.size()) {
            out += s[i];
            continue;
        }
        switch (s[++i]) {
            case 't': out += '\t'; break;
            case 'n': out += '\n'; break;
            case 'r': out += '\r'; break;
            default: out += s[i];
        }
    }
    return out;
}

inline std::vector<std::string> split_row(std::string_view line) {
    std::vector<std::string> cells;
    std::size_t start = 0;
    while (true) {
        const auto tab = line.find('\t', start);
        cells.push_back(unescape(line.substr(start, tab == std::string_view::npos ? tab : tab - start)));
        if (tab == std::string_view::npos) break;
        start = tab + 1;
    }
    return cells;
}

/// Data rows (header dropped, comments and blank lines skipped) with their
/// 1-based line numbers.
inline std::vector<std::pair<int, std::vector<std::string>>> read_rows(std::string_view text) {
    std::vector<std::pair<int, std::vector<std::string>>> rows;
    std::istringstream in{std::string(text)};
    std::string line;
    int lineno = 0;
    bool header_seen = false;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line.front() == '#') continue;
        if (!header_seen) {
            header_seen = true;
            continue;
        }
        rows.emplace_back(lineno, split_row(line));
    }
    return rows;
}

inline std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

}  // namespace tsv

struct BankEntry {
    std::string question;
    Category category = Category::others;
    Source source = Source::xai_bank;
};

class QuestionBank {
public:
    QuestionBank() = default;

    explicit QuestionBank(std::vector<BankEntry> entries) : entries_(std::move(entries)) {
        std::set<std::string> seen;
        for (const auto& e : entries_) {
            if (!seen.insert(e.question).second) throw std::invalid_argument("duplicate question: " + e.question);
        }
    }

    static QuestionBank parse(std::string_view text) {
        std::vector<BankEntry> entries;
        for (const auto& [lineno, cells] : tsv::read_rows(text)) {
            auto fail = [lineno = lineno](const std::string& what) -> BankEntry {
                throw std::invalid_argument("question bank line " + std::to_string(lineno) + ": " + what);
            };
            if (cells.size() < 3) fail("expected question, category, source");
            auto category = parse_category(cells[1]);
            auto source = parse_source(cells[2]);
            if (!category) fail("unknown category '" + cells[1] + "'");
            if (!source) fail("unknown source '" + cells[2] + "'");
            entries.push_back({cells[0], *category, *source});
        }
        return QuestionBank(std::move(entries));
    }

    static QuestionBank load(const std::filesystem::path& path) { return parse(tsv::read_file(path)); }

    std::string serialize() const {
        std::string out = "question\tcategory\tsource\n";
        for (const auto& e : entries_) {
            out += tsv::escape(e.question) + "\t" + std::string(to_string(e.category)) + "\t" +
                   std::string(to_string(e.source)) + "\n";
        }
        return out;
    }

    const std::vector<BankEntry>& entries() const noexcept { return entries_; }
    std::size_t size() const noexcept { return entries_.size(); }
    bool empty() const noexcept { return entries_.empty(); }

    std::vector<std::string> questions() const {
        std::vector<std::string> out;
        for (const auto& e : entries_) out.push_back(e.question);
        return out;
    }

    std::map<Category, int> category_counts() const {
        std::map<Category, int> counts;
        for (Category c : all_categories) counts[c] = 0;
        for (const auto& e : entries_) ++counts[e.category];
        return counts;
    }

    const BankEntry* find(std::string_view question) const {
        for (const auto& e : entries_) {
            if (e.question == question) return &e;
        }
        return nullptr;
    }

private:
    std::vector<BankEntry> entries_;
};

struct Judgment {
    std::string question;
    Correctness correctness = Correctness::no;
    Completeness completeness = Completeness::incomplete;
    std::string judge;
    std::string answer;
};

inline std::vector<Judgment> parse_judgments(std::string_view text) {
    std::vector<Judgment> out;
    for (const auto& [lineno, cells] : tsv::read_rows(text)) {
        auto fail = [lineno = lineno](const std::string& what) {
            throw std::invalid_argument("judgments line " + std::to_string(lineno) + ": " + what);
        };
        if (cells.size() < 7) fail("expected question, category, source, correctness, completeness, judge, answer");
        if (cells[3].empty() && cells[4].empty() && cells[5].empty()) continue;  // not judged yet
        auto correctness = parse_correctness(cells[3]);
        auto completeness = parse_completeness(cells[4]);
        if (!correctness) fail("unknown correctness '" + cells[3] + "'");
        if (!completeness) fail("unknown completeness '" + cells[4] + "'");
        if (cells[5].empty()) fail("judge is empty");
        out.push_back({cells[0], *correctness, *completeness, cells[5], cells[6]});
    }
    return out;
}

inline std::vector<Judgment> load_judgments(const std::filesystem::path& path) {
    return parse_judgments(tsv::read_file(path));
}

inline std::string serialize_judgments(const QuestionBank& bank, const std::vector<Judgment>& judgments) {
    std::string out = "question\tcategory\tsource\tcorrectness\tcompleteness\tjudge\tanswer\n";
    for (const auto& j : judgments) {
        const BankEntry* e = bank.find(j.question);
        out += tsv::escape(j.question) + "\t" + (e ? std::string(to_string(e->category)) : "") + "\t" +
               (e ? std::string(to_string(e->source)) : "") + "\t" + std::string(to_string(j.correctness)) + "\t" +
               std::string(to_string(j.completeness)) + "\t" + tsv::escape(j.judge) + "\t" + tsv::escape(j.answer) +
               "\n";
    }
    return out;
}

/// Plain question list: one question per non-empty, non-comment line.
inline std::vector<std::string> parse_question_list(std::string_view text) {
    std::vector<std::string> out;
    std::istringstream in{std::string(text)};
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        const auto first = line.find_first_not_of(" \t");
        if (first == std::string::npos || line[first] == '#') continue;
        out.push_back(line.substr(first));
    }
    return out;
}

}  // namespace selfex::eval
