/**
 * @file tfidf.hpp
 * @brief Exact TF-IDF cosine retrieval over model snippets.
 *
 * Weighting: tf = raw term count, idf = ln((1 + N) / (1 + df)) + 1, vectors
 * L2-normalized. Search is exhaustive. Results are ordered by descending
 * score; scores that agree to 1e-12 count as equal and fall back to the
 * (part, source_id) ascending tie-break so that rounding noise between
 * mathematically equal scores cannot reorder results.
 */

#pragma once

#include <selfex/tmk/snippets.hpp>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace selfex::retrieval {

using tmk::Part;
using tmk::Snippet;

/// Lowercased alphanumeric runs; everything else separates terms.
inline std::vector<std::string> tokenize(std::string_view text) {
    std::vector<std::string> terms;
    std::string current;
    for (unsigned char c : text) {
        if (std::isalnum(c)) {
            current += static_cast<char>(std::tolower(c));
        } else if (!current.empty()) {
            terms.push_back(std::move(current));
            current.clear();
        }
    }
    if (!current.empty()) terms.push_back(std::move(current));
    return terms;
}

/// Sparse, L2-normalized term weights. Empty for texts with no indexed terms.
struct EmbeddingVector {
    std::map<std::string, double> weights;

    double norm() const {
        double sum = 0.0;
        for (const auto& [_, w] : weights) sum += w * w;
        return std::sqrt(sum);
    }
    bool empty() const noexcept { return weights.empty(); }
};

/// Dot product of two normalized vectors, clamped into [0, 1]. Terms are
/// merged in sorted order, so cosine(a, b) == cosine(b, a) bit for bit.
inline double cosine(const EmbeddingVector& a, const EmbeddingVector& b) {
    double dot = 0.0;
    auto ia = a.weights.begin();
    auto ib = b.weights.begin();
    while (ia != a.weights.end() && ib != b.weights.end()) {
        if (ia->first < ib->first) {
            ++ia;
        } else if (ib->first < ia->first) {
            ++ib;
        } else {
            dot += ia->second * ib->second;
            ++ia;
            ++ib;
        }
    }
    return std::clamp(dot, 0.0, 1.0);
}

inline double idf(std::size_t n_docs, std::size_t df) {
    return std::log((1.0 + static_cast<double>(n_docs)) / (1.0 + static_cast<double>(df))) + 1.0;
}

namespace detail {

// Terms absent from `df` are dropped.
inline EmbeddingVector weigh(const std::vector<std::string>& terms, const std::map<std::string, std::size_t>& df,
                             std::size_t n_docs) {
    std::map<std::string, double> counts;
    for (const auto& t : terms) {
        if (df.contains(t)) counts[t] += 1.0;
    }
    EmbeddingVector v;
    double sum = 0.0;
    for (auto& [term, tf] : counts) {
        const double w = tf * idf(n_docs, df.at(term));
        v.weights.emplace(term, w);
        sum += w * w;
    }
    if (sum > 0.0) {
        const double n = std::sqrt(sum);
        for (auto& [_, w] : v.weights) w /= n;
    }
    return v;
}

inline std::int64_t score_key(double score) { return std::llround(score * 1e12); }

}  // namespace detail

struct SnippetIndex {
    std::vector<Snippet> snippets;
    std::map<std::string, std::size_t> vocabulary;  // term -> document frequency
    std::vector<EmbeddingVector> vectors;           // aligned with snippets

    std::size_t size() const noexcept { return snippets.size(); }
    bool empty() const noexcept { return snippets.empty(); }

    /// Embeds text against this index's vocabulary and idf table.
    EmbeddingVector embed(std::string_view text) const {
        return detail::weigh(tokenize(text), vocabulary, snippets.size());
    }
};

inline SnippetIndex build_index(std::vector<Snippet> snippets) {
    SnippetIndex index;
    std::vector<std::vector<std::string>> docs;
    docs.reserve(snippets.size());
    for (const auto& s : snippets) {
        auto terms = tokenize(s.text);
        for (const auto& t : std::set<std::string>(terms.begin(), terms.end())) ++index.vocabulary[t];
        docs.push_back(std::move(terms));
    }
    for (const auto& terms : docs) {
        index.vectors.push_back(detail::weigh(terms, index.vocabulary, snippets.size()));
    }
    index.snippets = std::move(snippets);
    return index;
}

struct ScoredSnippet {
    Snippet snippet;
    double score = 0.0;

    friend bool operator==(const ScoredSnippet&, const ScoredSnippet&) = default;
};

using PartSet = std::set<Part>;

inline const PartSet& all_parts() {
    static const PartSet parts{Part::task, Part::method, Part::knowledge};
    return parts;
}

/// Top-k snippets among `parts`, best first. Throws std::invalid_argument
/// for k < 1 or an empty part set.
inline std::vector<ScoredSnippet> search(const SnippetIndex& index, std::string_view query, int k,
                                         const PartSet& parts) {
    if (parts.empty()) throw std::invalid_argument("no searchable parts");
    if (k < 1) throw std::invalid_argument("k must be at least 1");

    const EmbeddingVector q = index.embed(query);
    struct Candidate {
        std::int64_t key;
        double score;
        std::size_t pos;
    };
    std::vector<Candidate> candidates;
    for (std::size_t i = 0; i < index.snippets.size(); ++i) {
        if (!parts.contains(index.snippets[i].part)) continue;
        const double s = cosine(q, index.vectors[i]);
        candidates.push_back({detail::score_key(s), s, i});
    }
    auto better = [&index](const Candidate& a, const Candidate& b) {
        if (a.key != b.key) return a.key > b.key;
        const auto& sa = index.snippets[a.pos];
        const auto& sb = index.snippets[b.pos];
        if (sa.part != sb.part) return sa.part < sb.part;
        if (sa.source_id != sb.source_id) return sa.source_id < sb.source_id;
        return a.pos < b.pos;
    };
    const std::size_t take = std::min<std::size_t>(static_cast<std::size_t>(k), candidates.size());
    std::partial_sort(candidates.begin(), candidates.begin() + static_cast<std::ptrdiff_t>(take),
                      candidates.end(), better);

    std::vector<ScoredSnippet> out;
    out.reserve(take);
    for (std::size_t i = 0; i < take; ++i) {
        out.push_back({index.snippets[candidates[i].pos], candidates[i].score});
    }
    return out;
}

/// Cosine of the TF-IDF vectors of `a` and `b` built over the two-document
/// corpus {a, b}. Symmetric, in [0, 1]; 0 when either side has no terms.
inline double answer_similarity(std::string_view a, std::string_view b) {
    const auto ta = tokenize(a);
    const auto tb = tokenize(b);
    if (ta.empty() || tb.empty()) return 0.0;
    std::map<std::string, std::size_t> df;
    for (const auto& t : std::set<std::string>(ta.begin(), ta.end())) ++df[t];
    for (const auto& t : std::set<std::string>(tb.begin(), tb.end())) ++df[t];
    return cosine(detail::weigh(ta, df, 2), detail::weigh(tb, df, 2));
}

}  // namespace selfex::retrieval
