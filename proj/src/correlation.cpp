#include "flab/correlation.hpp"

#include <algorithm>
#include <map>

#include "flab/engine.hpp"
#include "flab/errors.hpp"

namespace flab {

void CorrelationQuery::validate() const
{
    const auto s = shifts.size();
    if (s < 1 || s > static_cast<std::size_t>(max_query_length))
        throw BadQuery("query length " + std::to_string(s) + " outside [1, 8]");
    if (signs.size() != s)
        throw BadQuery("shifts and signs differ in length");
    for (std::size_t j = 0; j < s; ++j) {
        if (shifts[j] < -max_query_shift || shifts[j] > max_query_shift)
            throw BadQuery("shift " + std::to_string(shifts[j]) + " outside [-64, 64]");
        if (signs[j] != 1 && signs[j] != -1)
            throw BadQuery("signs must be +1 or -1");
    }
    if (dilation < 1 || dilation > 1000)
        throw BadQuery("dilation must lie in [1, 1000]");
}

std::string CorrelationQuery::str() const
{
    std::string out = "((";
    for (std::size_t j = 0; j < shifts.size(); ++j)
        out += (j ? "," : "") + std::to_string(shifts[j]);
    out += "),(";
    for (std::size_t j = 0; j < signs.size(); ++j)
        out += (j ? "," : "") + std::string(signs[j] > 0 ? "+1" : "-1");
    out += "))";
    if (dilation != 1)
        out += " r=" + std::to_string(dilation);
    return out;
}

CanonicalQuery canonicalize(const std::vector<CorrelationQuery> &per_source)
{
    std::map<std::pair<int, int>, int> net;
    for (std::size_t src = 0; src < per_source.size(); ++src) {
        const auto &q = per_source[src];
        q.validate();
        for (std::size_t j = 0; j < q.shifts.size(); ++j)
            net[{static_cast<int>(src), q.dilation * q.shifts[j]}] += q.signs[j];
    }
    CanonicalQuery c;
    int lowest = 0;
    bool first = true;
    for (auto &[key, e] : net)
        if (e != 0) {
            lowest = first ? key.second : std::min(lowest, key.second);
            first = false;
        }
    for (auto &[key, e] : net)
        if (e != 0)
            c.factors.push_back({key.first, key.second - lowest, e});
    std::sort(c.factors.begin(), c.factors.end());
    if (!c.factors.empty() && c.factors.front().exponent < 0) {
        c.negated = true;
        for (auto &f : c.factors)
            f.exponent = -f.exponent;
    }
    return c;
}

CanonicalQuery canonicalize(const CorrelationQuery &q) { return canonicalize(std::vector<CorrelationQuery>{q}); }

namespace {

using Factors = std::vector<CanonicalQuery::Factor>;

// Sample i of every class reads source index start + i + offset. Values per
// class are sums over samples of the product of source powers.
class Plan {
public:
    Plan(std::vector<std::shared_ptr<const ComplexSource>> sources) : _sources(std::move(sources))
    {
        for (const auto &s : _sources)
            _start = std::max(_start, s->start());
    }

    // Returns the class index, or -1 for the empty product.
    int add(const Factors &f)
    {
        if (f.empty())
            return -1;
        auto [it, inserted] = _index.emplace(f, static_cast<int>(_classes.size()));
        if (inserted) {
            _classes.push_back(f);
            for (const auto &x : f) {
                _span = std::max(_span, x.offset);
                _max_exp = std::max(_max_exp, std::abs(x.exponent));
            }
        }
        return it->second;
    }

    std::int64_t start() const { return _start; }

    std::vector<std::vector<DDComplex>> run(const std::vector<std::int64_t> &stops) const
    {
        if (_classes.empty())
            return std::vector<std::vector<DDComplex>>(stops.size());
        auto kernel = [this](std::int64_t begin, std::int64_t end, LaneSums &sums) { block(begin, end, sums); };
        return reduce_blocks(_classes.size(), stops.back(), stops, kernel);
    }

private:
    void block(std::int64_t begin, std::int64_t end, LaneSums &sums) const
    {
        const std::size_t len = static_cast<std::size_t>(end - begin + _span);
        const std::size_t exps = static_cast<std::size_t>(_max_exp);
        // powers[(src * exps + e - 1) * 2 + {0,1}] holds re/im of z^e
        std::vector<std::vector<double>> powers(_sources.size() * exps * 2, std::vector<double>(len));
        for (std::size_t s = 0; s < _sources.size(); ++s) {
            auto &re1 = powers[(s * exps) * 2];
            auto &im1 = powers[(s * exps) * 2 + 1];
            _sources[s]->fill(_start + begin, len, re1.data(), im1.data());
            for (std::size_t e = 2; e <= exps; ++e) {
                const auto &pr = powers[(s * exps + e - 2) * 2];
                const auto &pi = powers[(s * exps + e - 2) * 2 + 1];
                auto &qr = powers[(s * exps + e - 1) * 2];
                auto &qi = powers[(s * exps + e - 1) * 2 + 1];
                for (std::size_t i = 0; i < len; ++i) {
                    qr[i] = pr[i] * re1[i] - pi[i] * im1[i];
                    qi[i] = pr[i] * im1[i] + pi[i] * re1[i];
                }
            }
        }

        const std::int64_t head_end = std::min(end, (begin + lane_count - 1) / lane_count * lane_count);
        const std::int64_t body_end = std::max(head_end, end / lane_count * lane_count);
        for (std::size_t c = 0; c < _classes.size(); ++c) {
            const auto &f = _classes[c];
            struct Ref {
                const double *re;
                const double *im;
                double sign;
            };
            Ref refs[2 * max_query_length];
            const std::size_t nf = f.size();
            for (std::size_t k = 0; k < nf; ++k) {
                const std::size_t e = static_cast<std::size_t>(std::abs(f[k].exponent));
                const std::size_t slot = (static_cast<std::size_t>(f[k].source) * exps + e - 1) * 2;
                refs[k] = {powers[slot].data() + f[k].offset, powers[slot + 1].data() + f[k].offset,
                           f[k].exponent < 0 ? -1.0 : 1.0};
            }
            auto scalar = [&](std::int64_t i) {
                const std::size_t at = static_cast<std::size_t>(i - begin);
                double pr = refs[0].re[at];
                double pi = refs[0].sign * refs[0].im[at];
                for (std::size_t k = 1; k < nf; ++k) {
                    const double cr = refs[k].re[at];
                    const double ci = refs[k].sign * refs[k].im[at];
                    const double nr = pr * cr - pi * ci;
                    pi = pr * ci + pi * cr;
                    pr = nr;
                }
                sums.add(c, i, pr, pi);
            };
            for (std::int64_t i = begin; i < head_end; ++i)
                scalar(i);
            for (std::int64_t i0 = head_end; i0 < body_end; i0 += lane_count) {
                const std::size_t at = static_cast<std::size_t>(i0 - begin);
                double pr[lane_count], pi[lane_count];
                for (int l = 0; l < lane_count; ++l) {
                    pr[l] = refs[0].re[at + l];
                    pi[l] = refs[0].sign * refs[0].im[at + l];
                }
                for (std::size_t k = 1; k < nf; ++k) {
                    const double *re = refs[k].re + at;
                    const double *im = refs[k].im + at;
                    const double sg = refs[k].sign;
                    for (int l = 0; l < lane_count; ++l) {
                        const double cr = re[l];
                        const double ci = sg * im[l];
                        const double nr = pr[l] * cr - pi[l] * ci;
                        pi[l] = pr[l] * ci + pi[l] * cr;
                        pr[l] = nr;
                    }
                }
                sums.add8(c, pr, pi);
            }
            for (std::int64_t i = body_end; i < end; ++i)
                if (i >= head_end)
                    scalar(i);
        }
    }

    std::vector<std::shared_ptr<const ComplexSource>> _sources;
    std::int64_t _start = 0;
    std::map<Factors, int> _index;
    std::vector<Factors> _classes;
    int _span = 0;
    int _max_exp = 1;
};

std::vector<std::int64_t> correlation_stops(const AveragingScheme &scheme)
{
    if (scheme.kind() == AveragingScheme::Kind::weighted)
        throw BadScheme("correlations use unweighted schemes");
    return scheme.checkpoints();
}

// Source adapter that does not own the referenced source.
std::shared_ptr<const ComplexSource> borrow(const ComplexSource &s)
{
    return std::shared_ptr<const ComplexSource>(&s, [](const ComplexSource *) { });
}

std::vector<ComplexSeries> run_queries(const std::vector<std::shared_ptr<const ComplexSource>> &sources,
                                       const std::vector<CanonicalQuery> &canon, const AveragingScheme &scheme)
{
    const auto stops = correlation_stops(scheme);
    Plan plan(sources);
    std::vector<int> ids;
    for (const auto &c : canon)
        ids.push_back(plan.add(c.factors));
    const auto sums = plan.run(stops);
    std::vector<ComplexSeries> out(canon.size());
    for (std::size_t q = 0; q < canon.size(); ++q) {
        out[q].n_start = plan.start();
        for (std::size_t k = 0; k < stops.size(); ++k) {
            std::complex<double> v(1.0, 0.0);
            if (ids[q] >= 0) {
                const DDouble n = DDouble::from_int(stops[k]);
                const auto &s = sums[k][static_cast<std::size_t>(ids[q])];
                v = {static_cast<double>(s.re / n), static_cast<double>(s.im / n)};
                if (canon[q].negated)
                    v = std::conj(v);
            }
            out[q].points.push_back({stops[k], v, stops[k]});
        }
    }
    return out;
}

} // namespace

ComplexSeries empirical_correlation(const ComplexSource &source, const CorrelationQuery &q,
                                    const AveragingScheme &scheme)
{
    return run_queries({borrow(source)}, {canonicalize(q)}, scheme).front();
}

ComplexSeries joint_correlation(const std::vector<std::shared_ptr<const ComplexSource>> &sources,
                                const std::vector<CorrelationQuery> &per_source, const AveragingScheme &scheme)
{
    if (sources.empty() || sources.size() > 4)
        throw BadQuery("joint correlation takes 1 to 4 sources");
    if (per_source.size() != sources.size())
        throw BadQuery("one query per source required");
    return run_queries(sources, {canonicalize(per_source)}, scheme).front();
}

std::vector<ComplexSeries> correlation_series(const ComplexSource &source,
                                              const std::vector<CorrelationQuery> &queries,
                                              const AveragingScheme &scheme)
{
    std::vector<CanonicalQuery> canon;
    canon.reserve(queries.size());
    for (const auto &q : queries)
        canon.push_back(canonicalize(q));
    return run_queries({borrow(source)}, canon, scheme);
}

std::vector<TableEntry> correlation_table(const ComplexSource &source, const std::vector<CorrelationQuery> &queries,
                                          const AveragingScheme &scheme)
{
    std::vector<TableEntry> out;
    if (queries.empty())
        return out;
    auto series = correlation_series(source, queries, scheme);
    for (std::size_t q = 0; q < queries.size(); ++q)
        out.push_back({queries[q], series[q].final().value, series[q].final().n});
    return out;
}

std::vector<CorrelationQuery> exhaustive_queries(int max_len, int max_shift)
{
    // items are (shift, sign) pairs numbered 0 .. 2(2 max_shift + 1) - 1
    const int items = 2 * (2 * max_shift + 1);
    std::vector<CorrelationQuery> out;
    std::vector<int> pick;
    auto emit = [&] {
        CorrelationQuery q;
        for (int it : pick) {
            q.shifts.push_back(it / 2 - max_shift);
            q.signs.push_back(it % 2 == 0 ? 1 : -1);
        }
        out.push_back(std::move(q));
    };
    auto rec = [&](auto &self, int from) -> void {
        if (!pick.empty())
            emit();
        if (static_cast<int>(pick.size()) == max_len)
            return;
        for (int it = from; it < items; ++it) {
            pick.push_back(it);
            self(self, it);
            pick.pop_back();
        }
    };
    rec(rec, 0);
    return out;
}

} // namespace flab
