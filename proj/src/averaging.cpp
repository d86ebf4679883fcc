#include "flab/averaging.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>

#include "flab/engine.hpp"
#include "flab/errors.hpp"

namespace flab {

std::vector<std::int64_t> expand_checkpoints(const CheckpointRule &rule, std::int64_t n_max)
{
    if (n_max < min_checkpoint || n_max > max_checkpoint)
        throw BadScheme("N_max " + std::to_string(n_max) + " outside [10, 1e9]");
    std::vector<std::int64_t> out;
    if (rule.kind == CheckpointRule::Kind::powers_of) {
        if (!(rule.gamma > 1.0))
            throw BadScheme("powers_of needs gamma > 1");
        for (int k = 0;; ++k) {
            double v = std::round(std::pow(rule.gamma, k));
            if (v >= static_cast<double>(n_max))
                break;
            auto c = static_cast<std::int64_t>(v);
            if (c >= 1024 && (out.empty() || c > out.back()))
                out.push_back(c);
        }
        out.push_back(n_max);
        return out;
    }
    out = rule.list;
    for (std::size_t i = 0; i < out.size(); ++i) {
        if (out[i] < min_checkpoint)
            throw BadScheme("checkpoint " + std::to_string(out[i]) + " below 10");
        if (i > 0 && out[i] <= out[i - 1])
            throw BadScheme("checkpoints must be strictly increasing");
    }
    if (out.empty())
        throw BadScheme("empty checkpoint list");
    if (out.back() > n_max)
        throw BadScheme("checkpoint beyond N_max");
    if (out.back() != n_max)
        out.push_back(n_max);
    return out;
}

AveragingScheme AveragingScheme::full(std::int64_t n_max, CheckpointRule rule)
{
    AveragingScheme s;
    s._kind = Kind::full;
    s._checkpoints = expand_checkpoints(rule, n_max);
    return s;
}

AveragingScheme AveragingScheme::subsequence(std::vector<std::int64_t> m_k)
{
    if (m_k.empty())
        throw BadScheme("empty subsequence");
    AveragingScheme s;
    s._kind = Kind::subsequence;
    auto last = m_k.back();
    s._checkpoints = expand_checkpoints(CheckpointRule::explicit_points(std::move(m_k)), last);
    return s;
}

AveragingScheme AveragingScheme::weighted(HardyExpr w, std::int64_t n_max, CheckpointRule rule)
{
    AveragingScheme s;
    s._kind = Kind::weighted;
    s._checkpoints = expand_checkpoints(rule, n_max);
    s._weight = std::move(w);
    return s;
}

std::string format_double(double x)
{
    char buf[64];
    auto r = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, r.ptr);
}

std::string ComplexSeries::to_csv() const
{
    std::string out = "N,re,im,abs,samples\n";
    for (const auto &p : points) {
        out += std::to_string(p.n);
        out += ',' + format_double(p.value.real());
        out += ',' + format_double(p.value.imag());
        out += ',' + format_double(std::abs(p.value));
        out += ',' + std::to_string(p.samples) + '\n';
    }
    return out;
}

ComplexSeries cesaro_average(const ComplexSource &source, const AveragingScheme &scheme)
{
    if (scheme.kind() == AveragingScheme::Kind::weighted)
        return weighted_series(source, *scheme.weight(), scheme.checkpoints());
    const std::int64_t start = source.start();
    const auto &cps = scheme.checkpoints();
    auto kernel = [&](std::int64_t begin, std::int64_t end, LaneSums &sums) {
        std::vector<double> re(static_cast<std::size_t>(end - begin)), im(re.size());
        source.fill(start + begin, re.size(), re.data(), im.data());
        for (std::int64_t i = begin; i < end; ++i)
            sums.add(0, i, re[static_cast<std::size_t>(i - begin)], im[static_cast<std::size_t>(i - begin)]);
    };
    auto partial = reduce_blocks(1, cps.back(), cps, kernel);
    ComplexSeries s;
    s.n_start = start;
    for (std::size_t k = 0; k < cps.size(); ++k) {
        const DDouble n = DDouble::from_int(cps[k]);
        std::complex<double> v(static_cast<double>(partial[k][0].re / n),
                               static_cast<double>(partial[k][0].im / n));
        s.points.push_back({cps[k], v, cps[k]});
    }
    return s;
}

namespace {

using WeightFn = std::function<DDouble(std::int64_t)>;

// sum_{start <= n < N} (w(n+1) - w(n)) source(n) / w(N) at every N in `uppers`.
ComplexSeries weighted_core(const ComplexSource &source, const WeightFn &w,
                            const std::vector<std::int64_t> &uppers)
{
    const std::int64_t start = source.start();
    std::vector<std::int64_t> stops;
    for (auto n : uppers) {
        if (n <= start)
            throw BadScheme("weighted checkpoint " + std::to_string(n) + " not above n_start");
        stops.push_back(n - start);
    }
    auto kernel = [&](std::int64_t begin, std::int64_t end, LaneSums &sums) {
        const auto count = static_cast<std::size_t>(end - begin);
        std::vector<double> re(count), im(count);
        source.fill(start + begin, count, re.data(), im.data());
        DDouble prev = w(start + begin);
        for (std::size_t i = 0; i < count; ++i) {
            const std::int64_t n = start + begin + static_cast<std::int64_t>(i);
            DDouble next = w(n + 1);
            const double inc = static_cast<double>(next - prev);
            prev = next;
            sums.add(0, begin + static_cast<std::int64_t>(i), inc * re[i], inc * im[i]);
        }
    };
    auto partial = reduce_blocks(1, stops.back(), stops, kernel);
    ComplexSeries s;
    s.n_start = start;
    for (std::size_t k = 0; k < uppers.size(); ++k) {
        const DDouble wn = w(uppers[k]);
        std::complex<double> v(static_cast<double>(partial[k][0].re / wn),
                               static_cast<double>(partial[k][0].im / wn));
        s.points.push_back({uppers[k], v, stops[k]});
    }
    return s;
}

WeightFn hardy_weight(const HardyExpr &w)
{
    auto eval = std::make_shared<FastEvaluator>(w);
    return [eval](std::int64_t n) {
        double err;
        return eval->value(n, err);
    };
}

} // namespace

void check_weight(const HardyExpr &w, std::int64_t n)
{
    if (w.is_zero())
        throw BadWeight("zero weight");
    const Term &lead = w.leading();
    const bool unbounded = lead.a > 0 || (lead.a == 0 && lead.b > 0);
    if (!unbounded || lead.coef.sign() <= 0)
        throw BadWeight(w.str() + " is not eventually increasing and unbounded");
    // last grid point where w' <= 0
    const HardyExpr dw = derivative(w, 1);
    double threshold = 0.0;
    for (double t = static_cast<double>(w.n_start()); t < 1e15; t *= 1.05)
        if (!(dw.value(t) > 0.0))
            threshold = t;
    if (static_cast<double>(n) <= threshold)
        throw BadWeight(w.str() + " is not increasing below t = " + format_double(threshold));
}

std::complex<double> weighted_average(const ComplexSource &source, const HardyExpr &w, std::int64_t n)
{
    check_weight(w, n);
    return weighted_core(source, hardy_weight(w), {n}).final().value;
}

ComplexSeries weighted_series(const ComplexSource &source, const HardyExpr &w,
                              const std::vector<std::int64_t> &checkpoints)
{
    check_weight(w, checkpoints.front());
    return weighted_core(source, hardy_weight(w), checkpoints);
}

RealSequence finite_difference(RealSequence a, int r, int i)
{
    if (i < 0 || i > default_max_degree)
        throw std::invalid_argument("finite difference order out of range");
    if (r < 1)
        throw std::invalid_argument("finite difference step must be positive");
    std::vector<double> coef(static_cast<std::size_t>(i) + 1);
    for (int j = 0; j <= i; ++j) {
        double c = 1.0;
        for (int k = 1; k <= j; ++k)
            c = c * (i - k + 1) / k;
        coef[static_cast<std::size_t>(j)] = (i - j) % 2 == 0 ? c : -c;
    }
    return [a = std::move(a), coef, r](std::int64_t n) {
        DDouble s;
        for (std::size_t j = 0; j < coef.size(); ++j)
            s += a(n + static_cast<std::int64_t>(j) * r) * coef[j];
        return s;
    };
}

RealSequence hardy_values(const HardyExpr &a) { return hardy_weight(a); }

PartialSummation partial_summation_check(const ComplexSource &source, const HardyExpr &a, int d, int r,
                                         std::int64_t n)
{
    const HardyExpr scaled = derivative(a, d).scaled(Coefficient(Rational(static_cast<std::int64_t>(std::pow(r, d)))));
    check_weight(scaled, n);
    RealSequence delta = finite_difference(hardy_values(a), r, d);
    WeightFn w = [delta](std::int64_t m) {
        DDouble v = delta(m);
        return v < DDouble(0.0) ? -v : v;
    };
    PartialSummation out;
    out.weighted = weighted_core(source, w, {n}).final().value;
    const std::int64_t samples = n - source.start();
    out.cesaro = cesaro_average(source, AveragingScheme::full(samples, CheckpointRule::explicit_points({samples})))
                     .final()
                     .value;
    out.deviation = std::abs(out.weighted - out.cesaro);
    return out;
}

} // namespace flab
