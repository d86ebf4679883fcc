#include "flab/experiments.hpp"

#include <algorithm>
#include <cmath>

#include "flab/engine.hpp"
#include "flab/errors.hpp"

namespace flab {

namespace {

std::string fmt(double x) { return format_double(x); }

std::string fmt(std::int64_t x) { return std::to_string(x); }

struct Arc {
    double lo;
    double hi;
};

// [lo, lo + len) mod 1 as at most two pieces of [0, 1).
std::vector<Arc> arc_pieces(double lo, double len)
{
    if (len >= 1.0)
        return {{0.0, 1.0}};
    if (len <= 0.0)
        return {};
    lo -= std::floor(lo);
    if (lo + len <= 1.0)
        return {{lo, lo + len}};
    return {{lo, 1.0}, {0.0, lo + len - 1.0}};
}

std::vector<Arc> intersect(const std::vector<Arc> &a, const std::vector<Arc> &b)
{
    std::vector<Arc> out;
    for (const auto &x : a)
        for (const auto &y : b) {
            const double lo = std::max(x.lo, y.lo), hi = std::min(x.hi, y.hi);
            if (hi > lo)
                out.push_back({lo, hi});
        }
    return out;
}

void require_irrational(const Coefficient &alpha)
{
    switch (alpha.rationality()) {
    case Rationality::rational:
        throw HypothesisUnmet("alpha = " + alpha.str() + " is rational");
    case Rationality::unknown:
        throw Undecidable("rationality of " + alpha.str() + " is not decidable");
    case Rationality::irrational:
        break;
    }
}

void require_case_one(const HardyExpr &a)
{
    const auto cls = classify(a);
    if (cls.case_id != Case::I)
        throw HypothesisUnmet(a.str() + " is in case " + std::string(case_name(cls.case_id)) +
                              "; needs t^d log t < a < t^(d+1)");
}

} // namespace

void require_ortho_scope(const HardyExpr &a)
{
    const auto cls = classify(a);
    if (cls.case_id == Case::I || (cls.case_id == Case::II && cls.d >= 1))
        return;
    throw HypothesisUnmet(a.str() + " is in case " + std::string(case_name(cls.case_id)) +
                          "; orthogonality needs t^d log t < a < t^(d+1) or a ~ t^d log t, and can fail outside");
}

void require_power_scope(const HardyExpr &a)
{
    require_case_one(a);
    if (a.leading().a.denominator() == 1)
        throw HypothesisUnmet(a.str() + " is not above t^(d+eps) for any eps > 0");
}

OrthoResult ortho_test(const HardyExpr &a, const WeightSpec &w, const AveragingScheme &scheme, double tol,
                       const std::optional<Coefficient> &floor_alpha)
{
    require_ortho_scope(a);
    auto weight = make_weight(w);
    std::shared_ptr<const ComplexSource> base;
    if (floor_alpha)
        base = make_weight(WeightSpec::floor_power(a, *floor_alpha));
    else
        base = std::make_shared<HardyPhase>(a);
    auto src = make_source([base, weight](std::int64_t n) { return base->at(n) * weight->at(n); }, a.n_start());
    OrthoResult r{cesaro_average(*src, scheme), {}};
    auto &v = r.verdict;
    v.experiment = "ortho";
    v.params = {{"a", a.str()}, {"w", w.describe()}, {"N", fmt(scheme.n_max())}};
    if (floor_alpha)
        v.params.push_back({"floor_alpha", floor_alpha->str()});
    v.value = r.series.final().value;
    v.reference = 0.0;
    v.tolerance = tol;
    v.pass = std::abs(v.value) <= tol;
    return r;
}

SstResult sst_invariance(const ComplexSource &source, const std::vector<CorrelationQuery> &queries,
                         const std::vector<int> &dilations, const AveragingScheme &scheme, double tol)
{
    if (dilations.empty() || queries.empty())
        throw BadQuery("sst needs queries and dilations");
    std::vector<CorrelationQuery> all;
    for (const auto &q : queries)
        for (int r : dilations) {
            auto dq = q;
            dq.dilation = q.dilation * r;
            all.push_back(dq);
        }
    auto series = correlation_series(source, all, scheme);
    SstResult res{dilations, {}, 0.0, 0, {}};
    const std::size_t nr = dilations.size();
    for (std::size_t i = 0; i < queries.size(); ++i) {
        SstRow row{queries[i], {}, 0.0};
        for (std::size_t j = 0; j < nr; ++j)
            row.values.push_back(series[i * nr + j].final().value);
        for (std::size_t j = 0; j < nr; ++j)
            for (std::size_t k = j + 1; k < nr; ++k)
                row.deviation = std::max(row.deviation, std::abs(row.values[j] - row.values[k]));
        if (row.deviation > res.deviation || i == 0) {
            res.deviation = row.deviation;
            res.worst = i;
        }
        res.rows.push_back(std::move(row));
    }
    std::string rs;
    for (std::size_t j = 0; j < nr; ++j)
        rs += (j ? "," : "") + std::to_string(dilations[j]);
    auto &v = res.verdict;
    v.experiment = "sst";
    v.params = {{"queries", std::to_string(queries.size())}, {"r", rs}, {"N", fmt(scheme.n_max())}};
    v.value = res.deviation;
    v.reference = 0.0;
    v.tolerance = tol;
    v.pass = res.deviation <= tol;
    v.note = "worst query " + queries[res.worst].str();
    return res;
}

MultiAverage multi_ergodic_average(const RotationNumber &alpha_t, const RotationNumber &alpha_s, std::int64_t f,
                                   std::int64_t g, const HardyExpr &a, const AveragingScheme &scheme, double tol)
{
    require_power_scope(a);
    auto time = floor_times(a);
    auto src = make_source(
        [alpha_t, alpha_s, f, g, time](std::int64_t n) {
            double phase = 0.0;
            if (f != 0) {
                const double p = static_cast<double>(f) * alpha_t.orbit(0.0, n);
                phase += p - std::floor(p);
            }
            if (g != 0) {
                const double p = static_cast<double>(g) * alpha_s.orbit(0.0, time(n));
                phase += p - std::floor(p);
            }
            return unit(phase - std::floor(phase));
        },
        a.n_start());
    MultiAverage r{cesaro_average(*src, scheme), f == 0 && g == 0 ? 1.0 : 0.0, {}};
    auto &v = r.verdict;
    v.experiment = "multiavg";
    v.params = {{"alpha_T", fmt(alpha_t.value())}, {"alpha_S", fmt(alpha_s.value())}, {"f", fmt(f)},
                {"g", fmt(g)}, {"a", a.str()}, {"N", fmt(scheme.n_max())}};
    v.value = r.series.final().value;
    v.reference = r.predicted;
    v.tolerance = tol;
    v.pass = std::abs(v.value - v.reference) <= tol;
    return r;
}

double arc_intersection(double u, double v, double s1, double s2)
{
    const double len = v - u;
    auto cut = intersect(intersect(arc_pieces(u, len), arc_pieces(u - s1, len)), arc_pieces(u - s2, len));
    double m = 0.0;
    for (const auto &x : cut)
        m += x.hi - x.lo;
    return m;
}

Recurrence recurrence_average(const RotationNumber &alpha_t, const RotationNumber &alpha_s, double u, double v,
                              TimeFn s_time, const AveragingScheme &scheme, double tol, double slack)
{
    if (!(0.0 <= u && u <= v && v <= 1.0))
        throw std::invalid_argument("recurrence needs 0 <= u <= v <= 1");
    auto src = make_source([alpha_t, alpha_s, u, v, s_time](std::int64_t n) {
        return std::complex<double>(arc_intersection(u, v, alpha_t.orbit(0.0, n), alpha_s.orbit(0.0, s_time(n))), 0.0);
    });
    const double len = v - u;
    Recurrence r{cesaro_average(*src, scheme), len * len * len, {}};
    auto &ver = r.verdict;
    ver.experiment = "recurrence";
    ver.params = {{"alpha_T", fmt(alpha_t.value())}, {"alpha_S", fmt(alpha_s.value())}, {"u", fmt(u)},
                  {"v", fmt(v)}, {"N", fmt(scheme.n_max())}, {"slack", fmt(slack)}};
    const double value = r.series.final().value.real();
    ver.value = value;
    ver.reference = r.bound;
    ver.tolerance = tol;
    ver.pass = std::fabs(value - r.bound) <= tol && value >= r.bound - slack;
    return r;
}

Recurrence recurrence_average(const RotationNumber &alpha_t, const RotationNumber &alpha_s, double u, double v,
                              const HardyExpr &a, const AveragingScheme &scheme, double tol, double slack)
{
    require_power_scope(a);
    auto r = recurrence_average(alpha_t, alpha_s, u, v, floor_times(a), scheme, tol, slack);
    r.verdict.params.push_back({"a", a.str()});
    return r;
}

EquidistReport equidist_along(const HardyExpr &a, const BeattySequence &b, const RotationNumber &alpha, int k_max,
                              std::int64_t n, double tol, double residue_tol, int q_max)
{
    if (k_max < 1 || k_max > 64 || q_max < 1 || q_max > 64)
        throw std::invalid_argument("K and q_max must lie in [1, 64]");
    if (n < min_checkpoint || n > max_checkpoint)
        throw BadScheme("N " + std::to_string(n) + " outside [10, 1e9]");
    const auto fast = std::make_shared<const FastEvaluator>(a);
    const auto time = floor_times(a);
    const auto nk = static_cast<std::size_t>(k_max);
    std::int64_t first = 1;
    while (b(first) < a.n_start())
        ++first;
    std::vector<std::size_t> residue_base(static_cast<std::size_t>(q_max) + 1, 0);
    std::size_t width = 2 * nk;
    for (int q = 2; q <= q_max; ++q) {
        residue_base[static_cast<std::size_t>(q)] = width;
        width += static_cast<std::size_t>(q);
    }

    auto kernel = [&](std::int64_t begin, std::int64_t end, LaneSums &sums) {
        for (std::int64_t i = begin; i < end; ++i) {
            const std::int64_t m = b(first + i);
            const auto z = unit(fast->frac(m));
            const std::int64_t t = time(m);
            const auto w = unit(alpha.orbit(0.0, t));
            auto pz = z, pw = w;
            for (std::size_t k = 0; k < nk; ++k) {
                sums.add(k, i, pz.real(), pz.imag());
                sums.add(nk + k, i, pw.real(), pw.imag());
                pz *= z;
                pw *= w;
            }
            for (int q = 2; q <= q_max; ++q) {
                const std::int64_t c = ((t % q) + q) % q;
                sums.add(residue_base[static_cast<std::size_t>(q)] + static_cast<std::size_t>(c), i, 1.0, 0.0);
            }
        }
    };
    auto total = reduce_blocks(width, n, {n}, kernel).front();
    const DDouble dn = DDouble::from_int(n);
    EquidistReport r;
    r.weyl_sup = r.floor_sup = r.residue_deviation = 0.0;
    for (std::size_t k = 0; k < nk; ++k) {
        r.weyl.emplace_back(static_cast<double>(total[k].re / dn), static_cast<double>(total[k].im / dn));
        r.floor.emplace_back(static_cast<double>(total[nk + k].re / dn), static_cast<double>(total[nk + k].im / dn));
        r.weyl_sup = std::max(r.weyl_sup, std::abs(r.weyl.back()));
        r.floor_sup = std::max(r.floor_sup, std::abs(r.floor.back()));
    }
    for (int q = 2; q <= q_max; ++q) {
        auto &freq = r.residues[q];
        for (int c = 0; c < q; ++c) {
            const auto &s = total[residue_base[static_cast<std::size_t>(q)] + static_cast<std::size_t>(c)];
            freq.push_back(static_cast<double>(s.re / dn));
            r.residue_deviation = std::max(r.residue_deviation, std::fabs(freq.back() - 1.0 / q));
        }
    }
    auto &v = r.verdict;
    v.experiment = "equidist";
    v.params = {{"a", a.str()}, {"b", "beatty(" + b.alpha().str() + ", " + fmt(b.beta()) + ")"},
                {"alpha", fmt(alpha.value())}, {"K", std::to_string(k_max)}, {"N", fmt(n)}};
    v.value = std::max(r.weyl_sup, r.floor_sup);
    v.reference = 0.0;
    v.tolerance = tol;
    v.pass = v.value.real() <= tol && r.residue_deviation <= residue_tol;
    v.note = "residue deviation " + fmt(r.residue_deviation) + " (tolerance " + fmt(residue_tol) + ")";
    return r;
}

JointFactorization joint_factorization_test(const HardyExpr &a, const Coefficient &alpha, const CorrelationQuery &q1,
                                            const CorrelationQuery &q2, const AveragingScheme &scheme, double tol)
{
    require_case_one(a);
    require_irrational(alpha);
    auto s1 = std::make_shared<HardyPhase>(a);
    auto s2 = std::make_shared<HardyPhase>(a.scaled(alpha));
    JointFactorization r;
    r.joint = joint_correlation({s1, s2}, {q1, q2}, scheme).final().value;
    r.product = empirical_correlation(*s1, q1, scheme).final().value *
                empirical_correlation(*s2, q2, scheme).final().value;
    r.deviation = std::abs(r.joint - r.product);
    auto &v = r.verdict;
    v.experiment = "joint";
    v.params = {{"a", a.str()}, {"alpha", alpha.str()}, {"q1", q1.str()}, {"q2", q2.str()},
                {"N", fmt(scheme.n_max())}};
    v.value = r.joint;
    v.reference = r.product;
    v.tolerance = tol;
    v.pass = r.deviation <= tol;
    return r;
}

FloorCorrelation floor_sequence_correlation(const HardyExpr &a, const Coefficient &alpha, const CorrelationQuery &q,
                                            const AveragingScheme &scheme, double tol)
{
    require_case_one(a);
    require_irrational(alpha);
    const auto fa = std::make_shared<const FastEvaluator>(a);
    const auto fs = std::make_shared<const FastEvaluator>(a.scaled(alpha));
    const double alpha_d = alpha.value();
    auto identity_path = [fa, fs, alpha_d](std::int64_t n) {
        return unit(fs->frac(n)) * unit(-fa->frac(n) * alpha_d);
    };
    auto src = make_source(identity_path, a.n_start());

    FloorCorrelation r;
    r.series = empirical_correlation(*src, q, scheme);
    const RotationNumber rot(alpha);
    const auto time = floor_times(a);
    r.crosscheck = 0.0;
    const std::int64_t start = a.n_start(), span = scheme.n_max();
    for (int k = 0; k < 1000; ++k) {
        const std::int64_t n = start + span * k / 1000;
        r.crosscheck = std::max(r.crosscheck, std::abs(identity_path(n) - unit(rot.orbit(0.0, time(n)))));
    }
    r.drift = 0.0;
    for (auto it = r.series.points.rbegin(); it != r.series.points.rend(); ++it)
        if (it->n * 10 <= span) {
            r.drift = std::abs(r.series.final().value - it->value);
            break;
        }
    auto &v = r.verdict;
    v.experiment = "floorseq";
    v.params = {{"a", a.str()}, {"alpha", alpha.str()}, {"query", q.str()}, {"N", fmt(span)}};
    v.value = r.series.final().value;
    v.reference = std::numeric_limits<double>::quiet_NaN();
    v.tolerance = tol;
    v.pass = r.crosscheck <= 1e-12 && r.drift <= tol;
    v.note = "path gap " + fmt(r.crosscheck) + ", drift from N/10 " + fmt(r.drift);
    return r;
}

} // namespace flab
