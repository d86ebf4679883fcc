#include "flab/measures.hpp"

#include <algorithm>
#include <cmath>

#include "flab/engine.hpp"
#include "flab/errors.hpp"

namespace flab {

namespace {

double circular_distance(double x, double y)
{
    double d = std::fabs(x - y);
    d -= std::floor(d);
    return std::min(d, 1.0 - d);
}

bool is_constant(const HardyExpr &c)
{
    return c.is_zero() || (c.terms().size() == 1 && c.leading().a == 0 && c.leading().b == 0);
}

// Last point of a geometric grid where s * c'(t) <= 0, or 0.
double monotone_threshold(const HardyExpr &c, int s, double t_start, double t_end)
{
    const HardyExpr dc = derivative(c, 1);
    double threshold = 0.0;
    for (double t = t_start; t < t_end; t *= 1.05)
        if (!(s * dc.value(t) > 0.0))
            threshold = t;
    return threshold;
}

int eventual_direction(const HardyExpr &c)
{
    const HardyExpr dc = derivative(c, 1);
    return dc.leading().coef.sign() > 0 ? 1 : -1;
}

class Budget {
public:
    explicit Budget(std::int64_t limit) : _left(limit) { }

    void spend()
    {
        if (--_left < 0)
            throw SearchBudgetExceeded("evaluation budget exhausted");
    }

private:
    std::int64_t _left;
};

} // namespace

std::complex<double> EmpiricalMeasure::coefficient(int k) const
{
    if (k == 0)
        return 1.0;
    const int ak = k < 0 ? -k : k;
    if (ak > max_frequency())
        throw FourierOutOfRange("frequency " + std::to_string(k) + " beyond K = " + std::to_string(max_frequency()));
    const auto v = fourier[static_cast<std::size_t>(ak - 1)];
    return k > 0 ? v : std::conj(v);
}

std::complex<double> EmpiricalMeasure::coefficient_from_bins(int k) const
{
    const double b = static_cast<double>(bins.size());
    std::complex<double> sum = 0.0;
    for (std::size_t i = 0; i < bins.size(); ++i)
        if (bins[i] != 0)
            sum += static_cast<double>(bins[i]) * unit(std::fmod(k * (static_cast<double>(i) + 0.5) / b, 1.0));
    return sum / static_cast<double>(total);
}

double EmpiricalMeasure::mass(int first, int last) const
{
    std::int64_t s = 0;
    for (int i = std::max(first, 0); i < std::min(last, bin_count()); ++i)
        s += bins[static_cast<std::size_t>(i)];
    return static_cast<double>(s) / static_cast<double>(total);
}

EmpiricalMeasure EmpiricalMeasure::merged(const EmpiricalMeasure &o) const
{
    if (o.bins.size() != bins.size() || o.fourier.size() != fourier.size())
        throw std::invalid_argument("merging measures of different shapes");
    EmpiricalMeasure m = *this;
    m.total += o.total;
    for (std::size_t i = 0; i < bins.size(); ++i)
        m.bins[i] += o.bins[i];
    const double wa = static_cast<double>(total), wb = static_cast<double>(o.total);
    for (std::size_t k = 0; k < fourier.size(); ++k)
        m.fourier[k] = (fourier[k] * wa + o.fourier[k] * wb) / (wa + wb);
    return m;
}

std::string EmpiricalMeasure::histogram_csv() const
{
    std::string out = "bin_lo,mass\n";
    const double b = static_cast<double>(bins.size());
    for (std::size_t i = 0; i < bins.size(); ++i)
        out += format_double(static_cast<double>(i) / b) + ',' +
               format_double(static_cast<double>(bins[i]) / static_cast<double>(total)) + '\n';
    return out;
}

std::string EmpiricalMeasure::fourier_csv() const
{
    std::string out = "k,re,im,abs\n";
    for (std::size_t k = 0; k < fourier.size(); ++k)
        out += std::to_string(k + 1) + ',' + format_double(fourier[k].real()) + ',' +
               format_double(fourier[k].imag()) + ',' + format_double(std::abs(fourier[k])) + '\n';
    return out;
}

std::vector<MeasurePoint> build_empirical_measure(const CircleSource &source, const AveragingScheme &scheme,
                                                  int bins, int frequencies)
{
    if (bins < 1 || bins > max_bins || (bins & (bins - 1)) != 0)
        throw std::invalid_argument("bin count must be a power of two up to 65536");
    if (frequencies < 0 || frequencies > max_frequencies)
        throw std::invalid_argument("frequency count must be in [0, 64]");
    if (scheme.kind() == AveragingScheme::Kind::weighted)
        throw BadScheme("empirical measures use unweighted checkpoints");
    const std::int64_t start = source.start();
    const auto &cps = scheme.checkpoints();
    const auto nb = static_cast<std::size_t>(bins);
    const auto nk = static_cast<std::size_t>(frequencies);
    const double scale = static_cast<double>(bins);

    auto kernel = [&](std::int64_t begin, std::int64_t end, LaneSums &sums) {
        std::vector<double> x(static_cast<std::size_t>(end - begin));
        source.fill(start + begin, x.size(), x.data());
        for (std::int64_t i = begin; i < end; ++i) {
            const double v = x[static_cast<std::size_t>(i - begin)];
            auto b = static_cast<std::size_t>(v * scale);
            sums.add(std::min(b, nb - 1), i, 1.0, 0.0);
            const auto z = unit(v);
            auto p = z;
            for (std::size_t k = 0; k < nk; ++k) {
                sums.add(nb + k, i, p.real(), p.imag());
                p *= z;
            }
        }
    };
    auto partial = reduce_blocks(nb + nk, cps.back(), cps, kernel);

    std::vector<MeasurePoint> out;
    for (std::size_t c = 0; c < cps.size(); ++c) {
        EmpiricalMeasure m;
        m.total = cps[c];
        m.bins.resize(nb);
        for (std::size_t b = 0; b < nb; ++b)
            m.bins[b] = std::llround(static_cast<double>(partial[c][b].re));
        const DDouble n = DDouble::from_int(cps[c]);
        for (std::size_t k = 0; k < nk; ++k)
            m.fourier.emplace_back(static_cast<double>(partial[c][nb + k].re / n),
                                   static_cast<double>(partial[c][nb + k].im / n));
        out.push_back({cps[c], std::move(m)});
    }
    return out;
}

HardyExpr derivative_sequence(const HardyExpr &a, const Classification &cls)
{
    if (cls.case_id == Case::V)
        throw HypothesisUnmet("case V has no single derivative measure; reduce to progressions first");
    double f = 1.0;
    for (int i = 2; i <= cls.d; ++i)
        f *= i;
    return derivative(a, cls.d).scaled(Coefficient(Rational(1, static_cast<std::int64_t>(f))));
}

std::vector<MeasurePoint> lambda_from_expr(const HardyExpr &a, const AveragingScheme &scheme, int bins,
                                           int frequencies)
{
    HardyFrac src(derivative_sequence(a, classify(a)));
    return build_empirical_measure(src, scheme, bins, frequencies);
}

UniformityResult uniformity_test(const EmpiricalMeasure &m, int k_max, double tol)
{
    UniformityResult r{true, 0, 0.0};
    for (int k = 1; k <= k_max; ++k) {
        const double v = std::abs(m.coefficient(k));
        if (v > r.worst_value || r.worst_k == 0) {
            r.worst_value = v;
            r.worst_k = k;
        }
    }
    r.pass = r.worst_value <= tol;
    return r;
}

double concentration_test(const EmpiricalMeasure &m, double alpha, double window)
{
    const double b = static_cast<double>(m.bins.size());
    std::int64_t inside = 0;
    for (std::size_t i = 0; i < m.bins.size(); ++i)
        if (circular_distance((static_cast<double>(i) + 0.5) / b, alpha) < window)
            inside += m.bins[i];
    return static_cast<double>(inside) / static_cast<double>(m.total);
}

DensityResult density_bound_check(const EmpiricalMeasure &m, double c)
{
    const int b = m.bin_count();
    DensityResult r{true, 0.0, 1.0, 0.0};
    for (int width = b; width >= 8; width /= 2)
        for (int first = 0; first < b; first += width) {
            const double len = static_cast<double>(width) / b;
            const double ratio = m.mass(first, first + width) / len;
            if (ratio > r.ratio) {
                r.ratio = ratio;
                r.lo = static_cast<double>(first) / b;
                r.hi = static_cast<double>(first + width) / b;
            }
        }
    r.pass = r.ratio <= c;
    return r;
}

std::vector<std::int64_t> find_checkpoint_times(const HardyExpr &c, double alpha, double eps, int count,
                                                std::int64_t budget)
{
    if (count < 1 || !(eps > 0.0))
        throw std::invalid_argument("count and eps must be positive");
    Budget spent(budget);
    const std::int64_t n_start = c.n_start();
    auto hit = [&](std::int64_t n) {
        spent.spend();
        return circular_distance(eval_frac(c, n).frac, alpha) < eps;
    };
    std::vector<std::int64_t> out;
    if (is_constant(c)) {
        if (!hit(n_start))
            throw SearchBudgetExceeded("constant " + c.str() + " never enters the window");
        for (int i = 0; i < count; ++i)
            out.push_back(n_start + i);
        return out;
    }

    constexpr std::int64_t n_limit = std::int64_t{1} << 62;
    const int s = eventual_direction(c);
    const double threshold = monotone_threshold(c, s, static_cast<double>(n_start), 4.0e18);
    std::int64_t n = std::max<std::int64_t>(n_start, static_cast<std::int64_t>(std::ceil(threshold)) + 1);
    FastEvaluator eval(c);
    auto value = [&](std::int64_t k) {
        spent.spend();
        double err;
        return eval.value(k, err);
    };

    while (static_cast<int>(out.size()) < count) {
        if (hit(n)) {
            out.push_back(n++);
            continue;
        }
        // next level where the window is entered
        const DDouble v = value(n);
        const double level = s > 0 ? std::ceil(static_cast<double>(v) - (alpha - eps)) + (alpha - eps)
                                   : std::floor(static_cast<double>(v) - (alpha + eps)) + (alpha + eps);
        auto past = [&](std::int64_t k) {
            const DDouble w = value(k);
            return s > 0 ? DDouble(level) < w : w < DDouble(level);
        };
        if (!past(n_limit))
            throw SearchBudgetExceeded("no further window entries below 2^62");
        std::int64_t lo = n, hi = n_limit;
        while (hi - lo > 1) {
            const std::int64_t mid = lo + (hi - lo) / 2;
            (past(mid) ? hi : lo) = mid;
        }
        n = hi;
    }
    return out;
}

std::vector<double> find_crossing_reals(const HardyExpr &c, double alpha, int count, std::int64_t budget)
{
    if (is_constant(c))
        throw SearchBudgetExceeded("constant " + c.str() + " has no crossings");
    Budget spent(budget);
    const int s = eventual_direction(c);
    double t = std::max(monotone_threshold(c, s, c.t0(), 1e300), c.t0()) * 1.05;
    constexpr double t_limit = 1e300;
    std::vector<double> out;
    const double v0 = c.value(t);
    double level = s > 0 ? std::floor(v0 - alpha) + alpha : std::ceil(v0 - alpha) + alpha;
    while (static_cast<int>(out.size()) < count) {
        level += s;
        auto past = [&](double x) {
            spent.spend();
            return s > 0 ? c.value(x) >= level : c.value(x) <= level;
        };
        if (!past(t_limit))
            throw SearchBudgetExceeded("no further crossings below 1e300");
        // bisection in log t
        double lo = std::log(t), hi = std::log(t_limit);
        for (int i = 0; i < 200 && hi > lo; ++i) {
            const double mid = 0.5 * (lo + hi);
            if (mid <= lo || mid >= hi)
                break;
            (past(std::exp(mid)) ? hi : lo) = mid;
        }
        t = std::exp(hi);
        out.push_back(t);
    }
    return out;
}

} // namespace flab
