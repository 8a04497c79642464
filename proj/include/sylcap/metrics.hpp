#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <map>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "sylcap/corpus.hpp"

namespace sylcap::metrics {

struct MetricScores {
    double bleu1 = 0; // [0,1]
    double bleu4 = 0; // [0,1]
    double meteor = 0; // [0,1]
    double chrf = 0;  // [0,100]

    bool operator==(const MetricScores&) const = default;
};

struct ChrfParams {
    int max_n = 6;
    double beta = 2.0;
};

namespace detail {

// Joins n consecutive tokens with '\x1f' so distinct token boundaries never
// collide into the same key.
inline std::unordered_map<std::string, std::size_t>
ngram_counts(const TokenSequence& tokens, std::size_t n) {
    std::unordered_map<std::string, std::size_t> counts;
    if (tokens.size() < n) return counts;
    for (std::size_t i = 0; i + n <= tokens.size(); ++i) {
        std::string key = tokens[i];
        for (std::size_t k = 1; k < n; ++k) {
            key.push_back('\x1f');
            key += tokens[i + k];
        }
        ++counts[key];
    }
    return counts;
}

struct ClippedCounts {
    std::size_t matched = 0;
    std::size_t total = 0;
};

inline ClippedCounts clipped_ngram_overlap(const TokenSequence& hyp, const TokenSequence& ref,
                                           std::size_t n) {
    ClippedCounts c;
    c.total = hyp.size() >= n ? hyp.size() - n + 1 : 0;
    if (c.total == 0) return c;
    auto hyp_counts = ngram_counts(hyp, n);
    auto ref_counts = ngram_counts(ref, n);
    for (const auto& [gram, count] : hyp_counts) {
        auto it = ref_counts.find(gram);
        if (it != ref_counts.end()) c.matched += std::min(count, it->second);
    }
    return c;
}

inline double brevity_penalty(std::size_t hyp_len, std::size_t ref_len) {
    if (hyp_len >= ref_len) return 1.0;
    if (hyp_len == 0) return 0.0;
    return std::exp(1.0 - static_cast<double>(ref_len) / static_cast<double>(hyp_len));
}

} // namespace detail

/// Sentence BLEU: geometric mean of clipped n-gram precisions times the
/// brevity penalty. No smoothing; any zero-precision order zeroes the score.
inline double bleu(const TokenSequence& hyp, const TokenSequence& ref, int max_n) {
    if (max_n < 1) throw std::invalid_argument("bleu: max_n must be >= 1");
    if (ref.empty()) throw std::invalid_argument("bleu: reference must be non-empty");
    if (hyp.empty()) return 0.0;
    double log_sum = 0.0;
    for (int n = 1; n <= max_n; ++n) {
        auto c = detail::clipped_ngram_overlap(hyp, ref, static_cast<std::size_t>(n));
        if (c.total == 0 || c.matched == 0) return 0.0;
        log_sum += std::log(static_cast<double>(c.matched) / static_cast<double>(c.total));
    }
    return detail::brevity_penalty(hyp.size(), ref.size()) * std::exp(log_sum / max_n);
}

/// Corpus-level BLEU: n-gram counts and lengths pooled over all pairs before
/// the geometric mean and brevity penalty are taken.
inline double corpus_bleu(const std::vector<std::pair<TokenSequence, TokenSequence>>& pairs,
                          int max_n) {
    if (max_n < 1) throw std::invalid_argument("corpus_bleu: max_n must be >= 1");
    if (pairs.empty()) throw std::invalid_argument("corpus_bleu: no pairs");
    std::size_t hyp_len = 0, ref_len = 0;
    std::vector<std::size_t> matched(static_cast<std::size_t>(max_n), 0);
    std::vector<std::size_t> total(static_cast<std::size_t>(max_n), 0);
    for (const auto& [hyp, ref] : pairs) {
        if (ref.empty()) throw std::invalid_argument("corpus_bleu: reference must be non-empty");
        hyp_len += hyp.size();
        ref_len += ref.size();
        for (int n = 1; n <= max_n; ++n) {
            auto c = detail::clipped_ngram_overlap(hyp, ref, static_cast<std::size_t>(n));
            matched[static_cast<std::size_t>(n - 1)] += c.matched;
            total[static_cast<std::size_t>(n - 1)] += c.total;
        }
    }
    double log_sum = 0.0;
    for (int n = 0; n < max_n; ++n) {
        auto idx = static_cast<std::size_t>(n);
        if (total[idx] == 0 || matched[idx] == 0) return 0.0;
        log_sum += std::log(static_cast<double>(matched[idx]) / static_cast<double>(total[idx]));
    }
    return detail::brevity_penalty(hyp_len, ref_len) * std::exp(log_sum / max_n);
}

namespace detail {

inline std::u32string strip_whitespace(std::string_view text) {
    std::u32string out;
    for (char32_t c : uni::decode_utf8(text))
        if (!uni::is_space(c)) out.push_back(c);
    return out;
}

} // namespace detail

/// Character n-gram F-score on whitespace-stripped code points. Precision and
/// recall are averaged over orders 1..max_n that have at least one reference
/// n-gram; the F-score weights recall by beta^2. Range [0,100].
inline double chrf(std::string_view hypothesis, std::string_view reference, ChrfParams params = {}) {
    if (params.max_n < 1) throw std::invalid_argument("chrf: max_n must be >= 1");
    std::u32string hyp = detail::strip_whitespace(hypothesis);
    std::u32string ref = detail::strip_whitespace(reference);
    if (ref.empty()) throw std::invalid_argument("chrf: reference must be non-empty");
    double precision_sum = 0.0, recall_sum = 0.0;
    int orders = 0;
    for (int n = 1; n <= params.max_n; ++n) {
        auto len = static_cast<std::size_t>(n);
        if (ref.size() < len) break;
        std::size_t ref_total = ref.size() - len + 1;
        std::size_t hyp_total = hyp.size() >= len ? hyp.size() - len + 1 : 0;
        std::unordered_map<std::u32string, std::size_t> ref_counts;
        for (std::size_t i = 0; i + len <= ref.size(); ++i) ++ref_counts[ref.substr(i, len)];
        std::size_t matched = 0;
        if (hyp_total > 0) {
            std::unordered_map<std::u32string, std::size_t> hyp_counts;
            for (std::size_t i = 0; i + len <= hyp.size(); ++i) ++hyp_counts[hyp.substr(i, len)];
            for (const auto& [gram, count] : hyp_counts) {
                auto it = ref_counts.find(gram);
                if (it != ref_counts.end()) matched += std::min(count, it->second);
            }
        }
        precision_sum += hyp_total > 0 ? static_cast<double>(matched) / static_cast<double>(hyp_total) : 0.0;
        recall_sum += static_cast<double>(matched) / static_cast<double>(ref_total);
        ++orders;
    }
    if (orders == 0) return 0.0;
    double p = precision_sum / orders;
    double r = recall_sum / orders;
    if (p + r == 0.0) return 0.0;
    double b2 = params.beta * params.beta;
    return 100.0 * (1.0 + b2) * p * r / (b2 * p + r);
}

namespace detail {

// Alignment search for the METEOR chunk count: among all maximal one-to-one
// exact-match alignments, find the minimum number of chunks (maximal runs
// contiguous in both sequences). Branch and bound over hypothesis positions,
// preferring the continuation of the current run, pruning once a partial
// alignment cannot beat the best complete one.
struct ChunkSearch {
    const TokenSequence& hyp;
    const TokenSequence& ref;
    std::unordered_map<std::string, int> remaining_need; // per word, matches still required
    std::unordered_map<std::string, int> hyp_left;       // per word, hyp occurrences not yet visited
    std::vector<bool> ref_used;
    std::vector<std::vector<std::size_t>> candidates; // per hyp position, ref positions of same word
    std::size_t best = 0;

    ChunkSearch(const TokenSequence& h, const TokenSequence& r) : hyp(h), ref(r) {
        std::unordered_map<std::string, int> hyp_counts, ref_counts;
        for (const auto& t : hyp) ++hyp_counts[t];
        for (const auto& t : ref) ++ref_counts[t];
        for (const auto& [word, hc] : hyp_counts) {
            auto it = ref_counts.find(word);
            if (it != ref_counts.end()) remaining_need[word] = std::min(hc, it->second);
        }
        hyp_left = hyp_counts;
        ref_used.assign(ref.size(), false);
        candidates.resize(hyp.size());
        for (std::size_t i = 0; i < hyp.size(); ++i)
            if (remaining_need.count(hyp[i]))
                for (std::size_t j = 0; j < ref.size(); ++j)
                    if (ref[j] == hyp[i]) candidates[i].push_back(j);
        best = hyp.size() + 1;
    }

    void search(std::size_t i, bool prev_matched, std::size_t prev_j, std::size_t chunks) {
        if (chunks >= best) return;
        if (i == hyp.size()) {
            best = chunks;
            return;
        }
        const std::string& word = hyp[i];
        auto need_it = remaining_need.find(word);
        int need = need_it == remaining_need.end() ? 0 : need_it->second;
        int left = hyp_left[word];
        if (need > 0) {
            // Try aligning this occurrence; continuation of the run first.
            std::vector<std::size_t> order;
            order.reserve(candidates[i].size());
            std::size_t cont = prev_matched ? prev_j + 1 : ref.size();
            for (std::size_t j : candidates[i])
                if (j == cont && !ref_used[j]) order.push_back(j);
            for (std::size_t j : candidates[i])
                if (j != cont && !ref_used[j]) order.push_back(j);
            for (std::size_t j : order) {
                bool continues = prev_matched && j == prev_j + 1;
                ref_used[j] = true;
                --need_it->second;
                --hyp_left[word];
                search(i + 1, true, j, chunks + (continues ? 0 : 1));
                ++hyp_left[word];
                ++need_it->second;
                ref_used[j] = false;
            }
        }
        // Leave this occurrence unmatched if enough later occurrences remain.
        if (left - 1 >= need) {
            --hyp_left[word];
            search(i + 1, false, 0, chunks);
            ++hyp_left[word];
        }
    }

    std::size_t min_chunks() {
        search(0, false, 0, 0);
        return best;
    }
};

} // namespace detail

/// METEOR restricted to exact unigram matches: harmonic mean weighted 9:1
/// toward recall, discounted by a fragmentation penalty computed from the
/// minimum chunk count over all maximal alignments.
inline double meteor_exact(const TokenSequence& hyp, const TokenSequence& ref) {
    if (ref.empty()) throw std::invalid_argument("meteor_exact: reference must be non-empty");
    if (hyp.empty()) return 0.0;
    std::unordered_map<std::string, std::size_t> hyp_counts, ref_counts;
    for (const auto& t : hyp) ++hyp_counts[t];
    for (const auto& t : ref) ++ref_counts[t];
    std::size_t m = 0;
    for (const auto& [word, count] : hyp_counts) {
        auto it = ref_counts.find(word);
        if (it != ref_counts.end()) m += std::min(count, it->second);
    }
    if (m == 0) return 0.0;
    detail::ChunkSearch searcher(hyp, ref);
    std::size_t chunks = searcher.min_chunks();
    double dm = static_cast<double>(m);
    double precision = dm / static_cast<double>(hyp.size());
    double recall = dm / static_cast<double>(ref.size());
    double f = 10.0 * precision * recall / (recall + 9.0 * precision);
    double frag = static_cast<double>(chunks) / dm;
    double penalty = 0.5 * frag * frag * frag;
    return f * (1.0 - penalty);
}

/// Tokenizes both sides and computes all four metrics at sentence level.
inline MetricScores score_sentence(std::string_view hypothesis, std::string_view reference) {
    TokenSequence hyp = tokenize(normalize(hypothesis));
    TokenSequence ref = tokenize(normalize(reference));
    MetricScores s;
    s.bleu1 = bleu(hyp, ref, 1);
    s.bleu4 = bleu(hyp, ref, 4);
    s.meteor = meteor_exact(hyp, ref);
    s.chrf = chrf(hypothesis, reference);
    return s;
}

/// Arithmetic mean per field.
inline MetricScores aggregate(const std::vector<MetricScores>& scores) {
    if (scores.empty()) throw std::invalid_argument("aggregate: empty score list");
    MetricScores mean;
    for (const auto& s : scores) {
        mean.bleu1 += s.bleu1;
        mean.bleu4 += s.bleu4;
        mean.meteor += s.meteor;
        mean.chrf += s.chrf;
    }
    auto n = static_cast<double>(scores.size());
    mean.bleu1 /= n;
    mean.bleu4 /= n;
    mean.meteor /= n;
    mean.chrf /= n;
    return mean;
}

} // namespace sylcap::metrics
