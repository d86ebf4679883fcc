#pragma once

#include <complex>
#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "flab/averaging.hpp"
#include "flab/sequence.hpp"

namespace flab {

constexpr int max_query_length = 8;
constexpr int max_query_shift = 64;

struct CorrelationQuery {
    std::vector<int> shifts;
    std::vector<int> signs;
    int dilation = 1;

    /// Throws BadQuery.
    void validate() const;
    std::string str() const;
};

// Net exponent per shifted index after scaling by the dilation, translated so
// the smallest index carrying a nonzero exponent is 0. Equivalent queries
// have equal factors. `negated` records that the stored factors are the
// sign-flipped form, whose value is the conjugate.
struct CanonicalQuery {
    struct Factor {
        int source;
        int offset;
        int exponent;
        bool operator==(const Factor &) const = default;
        auto operator<=>(const Factor &) const = default;
    };
    std::vector<Factor> factors;
    bool negated = false;
};

/// Factors from several sources; query i applies to source i.
CanonicalQuery canonicalize(const std::vector<CorrelationQuery> &per_source);
CanonicalQuery canonicalize(const CorrelationQuery &q);

// For each checkpoint N, the mean over m of prod_j source(m + r n_j)^(k_j),
// where exponent -1 is complex conjugation. m runs over N consecutive values
// starting where the smallest index used is the source's first index.
ComplexSeries empirical_correlation(const ComplexSource &source, const CorrelationQuery &q,
                                    const AveragingScheme &scheme);

/// Product over sources of their queries, averaged jointly; 1 to 4 sources.
ComplexSeries joint_correlation(const std::vector<std::shared_ptr<const ComplexSource>> &sources,
                                const std::vector<CorrelationQuery> &per_source,
                                const AveragingScheme &scheme);

struct TableEntry {
    CorrelationQuery query;
    std::complex<double> value;
    std::int64_t n;
};

/// All queries in one pass; each series equals the corresponding single call bitwise.
std::vector<ComplexSeries> correlation_series(const ComplexSource &source,
                                              const std::vector<CorrelationQuery> &queries,
                                              const AveragingScheme &scheme);

std::vector<TableEntry> correlation_table(const ComplexSource &source, const std::vector<CorrelationQuery> &queries,
                                          const AveragingScheme &scheme);

/// Every multiset of (shift, sign) pairs of size 1..max_len, shifts in [-max_shift, max_shift].
/// Order within a query does not change its value, so multisets cover all queries.
std::vector<CorrelationQuery> exhaustive_queries(int max_len, int max_shift);

} // namespace flab
