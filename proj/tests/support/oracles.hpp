// Independent reference implementations used to check the library.
//
// The TF-IDF oracle works on dense vectors over a sorted vocabulary and
// computes cosine as dot / (|a| |b|) on unnormalized weights, so it shares
// no code path with retrieval::search. The t-distribution oracle is
// Boost.Math.
#pragma once

#include <selfex/tmk/snippets.hpp>

#include <boost/math/distributions/students_t.hpp>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

namespace selfex::testing {

inline std::vector<std::string> oracle_terms(const std::string& text) {
    std::vector<std::string> out;
    std::string cur;
    for (char ch : text + " ") {
        const auto c = static_cast<unsigned char>(ch);
        if (std::isalnum(c)) {
            cur.push_back(static_cast<char>(std::tolower(c)));
        } else if (!cur.empty()) {
            out.push_back(cur);
            cur.clear();
        }
    }
    return out;
}

struct OracleHit {
    std::string source_id;
    tmk::Part part;
    double score;
};

/// Scores every snippet in `parts`, sorts the full list by the documented
/// order (score descending with scores equal to 1e-12 tied, then part, then
/// source id) and returns the first k.
inline std::vector<OracleHit> brute_force_search(const std::vector<tmk::Snippet>& corpus, const std::string& query,
                                                 int k, const std::set<tmk::Part>& parts) {
    std::vector<std::vector<std::string>> docs;
    std::set<std::string> vocab_set;
    for (const auto& s : corpus) {
        docs.push_back(oracle_terms(s.text));
        vocab_set.insert(docs.back().begin(), docs.back().end());
    }
    const std::vector<std::string> vocab(vocab_set.begin(), vocab_set.end());
    const double n = static_cast<double>(corpus.size());
    std::vector<double> idf(vocab.size());
    for (std::size_t j = 0; j < vocab.size(); ++j) {
        int df = 0;
        for (const auto& d : docs) df += std::find(d.begin(), d.end(), vocab[j]) != d.end() ? 1 : 0;
        idf[j] = std::log((1.0 + n) / (1.0 + df)) + 1.0;
    }
    auto dense = [&](const std::vector<std::string>& terms) {
        std::vector<double> v(vocab.size(), 0.0);
        for (std::size_t j = 0; j < vocab.size(); ++j) {
            v[j] = static_cast<double>(std::count(terms.begin(), terms.end(), vocab[j])) * idf[j];
        }
        return v;
    };
    auto cos = [](const std::vector<double>& a, const std::vector<double>& b) {
        double dot = 0, na = 0, nb = 0;
        for (std::size_t j = 0; j < a.size(); ++j) {
            dot += a[j] * b[j];
            na += a[j] * a[j];
            nb += b[j] * b[j];
        }
        if (na == 0 || nb == 0) return 0.0;
        return std::clamp(dot / (std::sqrt(na) * std::sqrt(nb)), 0.0, 1.0);
    };
    const auto q = dense(oracle_terms(query));
    std::vector<OracleHit> hits;
    for (std::size_t i = 0; i < corpus.size(); ++i) {
        if (!parts.contains(corpus[i].part)) continue;
        hits.push_back({corpus[i].source_id, corpus[i].part, cos(q, dense(docs[i]))});
    }
    std::stable_sort(hits.begin(), hits.end(), [](const OracleHit& a, const OracleHit& b) {
        const auto ka = std::llround(a.score * 1e12);
        const auto kb = std::llround(b.score * 1e12);
        if (ka != kb) return ka > kb;
        if (a.part != b.part) return a.part < b.part;
        return a.source_id < b.source_id;
    });
    if (hits.size() > static_cast<std::size_t>(k)) hits.resize(static_cast<std::size_t>(k));
    return hits;
}

inline double oracle_t_cdf(double t, double df) {
    return boost::math::cdf(boost::math::students_t_distribution<double>(df), t);
}

/// Two-tailed paired t-test p from Boost, with the statistic accumulated in
/// long double.
inline double oracle_paired_p(const std::vector<double>& xs, const std::vector<double>& ys) {
    const std::size_t n = xs.size();
    long double mean = 0;
    for (std::size_t i = 0; i < n; ++i) mean += static_cast<long double>(xs[i]) - ys[i];
    mean /= n;
    long double ss = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const long double d = static_cast<long double>(xs[i]) - ys[i] - mean;
        ss += d * d;
    }
    const long double sd = std::sqrt(ss / (n - 1));
    const double t = static_cast<double>(mean / (sd / std::sqrt(static_cast<long double>(n))));
    const boost::math::students_t_distribution<double> dist(static_cast<double>(n - 1));
    return 2.0 * boost::math::cdf(boost::math::complement(dist, std::fabs(t)));
}

}  // namespace selfex::testing
