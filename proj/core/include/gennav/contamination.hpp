// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Core>

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

namespace gennav::contamination {

/// Lowercases ASCII and splits on whitespace and punctuation (ASCII and common Unicode).
std::vector<std::string> tokenize(std::string_view text);

using NGramSet = std::unordered_set<std::string>;

/// Distinct n-grams; empty when the text has fewer than n tokens.
NGramSet ngrams(std::span<const std::string> tokens, int n);

inline constexpr std::array<int, 3> kProfileOrders {5, 8, 13};

struct NGramProfile
{
    std::vector<std::string> tokens;
    NGramSet grams5;
    NGramSet grams8;
    NGramSet grams13;

    static NGramProfile build(std::string_view text);
    const NGramSet& grams(int n) const;
};

/// |A and B| / |A or B| over 5-grams; 0 when both sets are empty.
double jaccard5(std::string_view a, std::string_view b);
double jaccard5(const NGramProfile& a, const NGramProfile& b);

/// Fraction of the benchmark text's n-grams found in the training text. Throws when the
/// benchmark text has no n-grams of that order.
double containment(std::string_view bench, std::string_view train, int n);
double containment(const NGramProfile& bench, const NGramProfile& train, int n);

struct Nearest
{
    double value = 0.0;
    std::optional<std::size_t> index; ///< pool index of the best match, absent when nothing overlaps
};

/// Inverted n-gram index over a training pool. Hash hits are re-verified on the raw n-grams.
class PoolIndex
{
public:
    explicit PoolIndex(std::vector<std::string> pool);

    std::size_t size() const { return _texts.size(); }
    const std::string& text(std::size_t index) const { return _texts.at(index); }
    const NGramProfile& profile(std::size_t index) const { return _profiles.at(index); }

    /// Max over the pool of containment(bench, pool_i, n); absent when the benchmark has no n-grams.
    std::optional<Nearest> max_containment(const NGramProfile& bench, int n) const;
    Nearest max_jaccard5(const NGramProfile& bench) const;
    bool any_shared(const NGramProfile& bench, int n) const;

private:
    std::unordered_map<std::size_t, std::size_t> overlap_counts(const NGramProfile& bench, int n) const;
    std::size_t pick(std::size_t current, std::size_t challenger) const;

    std::vector<std::string> _texts;
    std::vector<NGramProfile> _profiles;
    std::unordered_map<int, std::unordered_map<std::uint64_t, std::vector<std::size_t>>> _index;
};

struct FlagResult
{
    bool flagged = false;
    std::optional<double> containment; ///< absent for benchmark texts under 8 tokens
    std::optional<std::size_t> nearest;
};

/// Flag iff some pool prompt contains at least `threshold` of the benchmark's 8-grams.
FlagResult flag_8gram(std::string_view bench, const PoolIndex& pool, double threshold = 0.70);

/// True iff the benchmark shares at least one exact 13-gram with the pool.
bool collide_13gram(std::string_view bench, const PoolIndex& pool);

using Vectors = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

struct CosineResult
{
    double max_similarity = 0.0;
    std::size_t nearest = 0;
    bool flagged = false;
};

/// Per benchmark row: max cosine similarity to any pool row. Rows are renormalized.
std::vector<CosineResult> cosine_screen(const Vectors& bench, const Vectors& pool, double threshold = 0.8);

/// One comma-separated row per prompt.
Vectors read_vectors(const std::string& path);

struct Distribution
{
    std::size_t count = 0;
    double mean = 0.0;
    double min = 0.0;
    double p50 = 0.0;
    double p90 = 0.0;
    double p99 = 0.0;
    double max = 0.0;
    std::vector<std::size_t> histogram; ///< 20 equal bins over [0,1]
};

Distribution summarize(std::span<const double> values);

struct AuditEntry
{
    std::size_t bench_index = 0;
    double jaccard5 = 0.0;
    std::optional<double> containment5;
    std::optional<double> containment8;
    bool flag8 = false;
    bool collision13 = false;
    std::optional<std::size_t> nearest; ///< pool index by 8-gram containment
    std::optional<double> cosine;
    bool cosine_flag = false;
};

struct AuditReport
{
    std::size_t bench_size = 0;
    std::size_t pool_size = 0;
    std::vector<AuditEntry> entries;
};

struct AuditOptions
{
    double containment_threshold = 0.70;
    double cosine_threshold = 0.8;
    int workers = 1;
};

AuditReport audit(std::span<const std::string> bench, const PoolIndex& pool, const AuditOptions& options = {},
                  const Vectors* bench_vectors = nullptr, const Vectors* pool_vectors = nullptr);

/// Per-metric distributions and flag lists.
std::string audit_report_json(const AuditReport& report, std::span<const std::string> bench,
                              const PoolIndex& pool);

} // namespace gennav::contamination
