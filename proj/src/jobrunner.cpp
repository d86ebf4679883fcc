#include "flab/jobrunner.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include "flab/acceptance.hpp"
#include "flab/engine.hpp"
#include "flab/errors.hpp"
#include "flab/measures.hpp"

#ifndef FLAB_VERSION
#define FLAB_VERSION "0.0.0"
#endif

namespace flab {

namespace {

const std::vector<FieldSpec> scheme_fields = {
    {"N", "integer", true, "last checkpoint, 10 .. 1e9"},
    {"checkpoints", "integer[]", false, "explicit checkpoints ending at N"},
    {"gamma", "number", false, "geometric checkpoint ratio, default 2"},
    {"averaging", "object", false, "{\"kind\": \"full\"} or {\"kind\": \"weighted\", \"w\": expr}"},
};

std::vector<FieldSpec> with_scheme(std::vector<FieldSpec> f)
{
    f.insert(f.end(), scheme_fields.begin(), scheme_fields.end());
    return f;
}

std::vector<TaskSpec> build_catalog()
{
    const FieldSpec expr{"expr", "expr", true, "Hardy expression, e.g. \"t^(3/2)\""};
    const FieldSpec tol{"tolerance", "number", false, "verdict tolerance"};
    const FieldSpec q_fields[] = {{"shifts", "integer[]", true, "shifts n_j"},
                                  {"signs", "integer[]", true, "exponents k_j in {+1, -1}"},
                                  {"dilation", "integer", false, "r, default 1"}};
    const FieldSpec lambda{"lambda", "measure", false,
                           "{\"kind\": \"uniform\" | \"point_mass\" | \"fourier_table\"}; default from the case"};
    const FieldSpec source{"source", "source", false,
                           "{\"kind\": \"hardy\" | \"weight\" | \"orbit\"}; alternative to expr"};
    const FieldSpec opt_expr{"expr", "expr", false, "Hardy expression; e(a(n)) is the source"};
    const FieldSpec alpha_t{"alpha_T", "rotation", true, "rotation number of T"};
    const FieldSpec alpha_s{"alpha_S", "rotation", true, "rotation number of S"};

    std::vector<TaskSpec> c;
    c.push_back({"classify", "case and degree of a Hardy expression", {expr},
                 {{"task", "classify"}, {"expr", "t^(3/2)"}}});
    c.push_back({"eval",
                 "{a(n)} with an error bound, optionally [a(n)]",
                 {expr, {"n", "integer | integer[]", true, "evaluation points"},
                  {"floor", "boolean", false, "also report [a(n)]"}},
                 {{"task", "eval"}, {"expr", "t*log(t)"}, {"n", {10, 1000}}, {"floor", true}}});
    c.push_back({"correlate",
                 "empirical correlation of one source, with the oracle value when known",
                 with_scheme({opt_expr, source, q_fields[0], q_fields[1], q_fields[2], lambda, tol}),
                 {{"task", "correlate"},
                  {"expr", "sqrt2*t^2"},
                  {"shifts", {2, 1, 1, 0}},
                  {"signs", {1, -1, -1, 1}},
                  {"N", 100000}}});
    c.push_back({"predict", "closed-form correlation prediction for cases I to IV",
                 {expr, q_fields[0], q_fields[1], q_fields[2], lambda},
                 {{"task", "predict"}, {"expr", "t^(3/2)"}, {"shifts", {1, 0}}, {"signs", {1, -1}}}});
    c.push_back({"reconcile",
                 "prediction against the unipotent model, for one query or an exhaustive set",
                 {expr, {"shifts", "integer[]", false, "one query"}, {"signs", "integer[]", false, "one query"},
                  q_fields[2], {"exhaustive", "object", false, "{\"s\": 4, \"shift\": 5}"}, lambda},
                 {{"task", "reconcile"}, {"expr", "t^(5/2)"}, {"exhaustive", {{"s", 2}, {"shift", 3}}}}});
    c.push_back({"measure",
                 "empirical measure of {c(n)}, c = a^(d)/d!, or of {a(n)}",
                 {expr,
                  {"N", "integer", false, "last checkpoint; required without checkpoint_search"},
                  scheme_fields[1], scheme_fields[2],
                  {"of", "string", false, "\"lambda\" (default) or \"phase\""},
                  {"bins", "integer", false, "power of two, default 1024"},
                  {"frequencies", "integer", false, "K, default 16"},
                  {"checkpoint_search", "object", false, "{\"alpha\", \"eps\"}: N from the first hit of {c(N)}"},
                  {"uniformity", "object", false, "{\"K\", \"tolerance\"}"},
                  {"density", "object", false, "{\"C\"}"},
                  {"concentration", "object", false, "{\"alpha\", \"window\", \"min_mass\"}"}},
                 {{"task", "measure"}, {"expr", "t^(3/2)"}, {"N", 100000},
                  {"uniformity", {{"K", 5}, {"tolerance", 0.05}}}}});
    c.push_back({"sst",
                 "dilation invariance of correlations",
                 with_scheme({opt_expr, source, {"queries", "query[]", false, "list of {shifts, signs}"},
                              {"exhaustive", "object", false, "{\"s\", \"shift\"}"},
                              {"dilations", "integer[]", false, "default [1, 2, 3]"}, tol}),
                 {{"task", "sst"},
                  {"expr", "t^(3/2)"},
                  {"queries", {{{"shifts", {1, 0}}, {"signs", {1, -1}}}}},
                  {"N", 100000}}});
    c.push_back({"ortho",
                 "mean of e(a(n)) w(n), or of e([a(n)] alpha) w(n)",
                 with_scheme({expr, {"weight", "weight", true, "{\"kind\": ...}"},
                              {"floor_alpha", "coefficient", false, "use e([a(n)] alpha)"}, tol}),
                 {{"task", "ortho"}, {"expr", "t^(3/2)"}, {"weight", {{"kind", "bernoulli"}}}, {"N", 100000}}});
    c.push_back({"multiavg",
                 "mean of e(f {n alpha_T}) e(g {[a(n)] alpha_S})",
                 with_scheme({alpha_t, alpha_s, {"f", "integer", true, "frequency on T"},
                              {"g", "integer", true, "frequency on S"}, expr, tol}),
                 {{"task", "multiavg"},
                  {"alpha_T", "phi"},
                  {"alpha_S", "sqrt2"},
                  {"f", 1},
                  {"g", 1},
                  {"expr", "t^(3/2)"},
                  {"N", 100000}}});
    c.push_back({"recurrence",
                 "mean of m(A n (A - {n alpha_T}) n (A - {[a(n)] alpha_S})), A = [u, v)",
                 with_scheme({alpha_t, alpha_s, {"u", "number", true, "A = [u, v)"}, {"v", "number", true, ""},
                              expr, tol, {"slack", "number", false, "allowed shortfall below (v-u)^3"}}),
                 {{"task", "recurrence"},
                  {"alpha_T", "phi"},
                  {"alpha_S", "sqrt2"},
                  {"u", 0.0},
                  {"v", 0.5},
                  {"expr", "t^(3/2)"},
                  {"N", 100000}}});
    c.push_back({"equidist",
                 "Weyl means and residues of a(b(n)) along a Beatty sequence b",
                 {expr, {"beatty", "object", true, "{\"alpha\": coefficient >= 1, \"beta\": number}"},
                  {"alpha", "rotation", true, "multiplier of [a(b(n))]"},
                  {"K", "integer", false, "frequencies, default 3"},
                  {"N", "integer", true, "number of terms"}, tol,
                  {"residue_tolerance", "number", false, "default 0.01"},
                  {"q_max", "integer", false, "largest modulus, default 5"}},
                 {{"task", "equidist"},
                  {"expr", "t^(3/2)"},
                  {"beatty", {{"alpha", "phi"}, {"beta", 0.0}}},
                  {"alpha", "sqrt2"},
                  {"N", 100000}}});
    c.push_back({"joint",
                 "joint correlation of e(a(n)) and e(alpha a(n)) against the product",
                 with_scheme({expr, {"alpha", "coefficient", true, "irrational multiplier"},
                              {"q1", "query", true, "query on e(a(n))"}, {"q2", "query", true, "query on e(alpha a(n))"},
                              tol}),
                 {{"task", "joint"},
                  {"expr", "t^(3/2)"},
                  {"alpha", "sqrt2"},
                  {"q1", {{"shifts", {1, 0}}, {"signs", {1, -1}}}},
                  {"q2", {{"shifts", {1, 0}}, {"signs", {1, -1}}}},
                  {"N", 100000}}});
    c.push_back({"floorseq",
                 "correlation of e([a(n)] alpha) through e(a(n) alpha) e(-{a(n)} alpha)",
                 with_scheme({expr, {"alpha", "coefficient", true, "irrational multiplier"},
                              {"query", "query", true, "{shifts, signs}"}, tol}),
                 {{"task", "floorseq"},
                  {"expr", "t^(3/2)"},
                  {"alpha", "sqrt2"},
                  {"query", {{"shifts", {0}}, {"signs", {1}}}},
                  {"N", 100000}}});
    c.push_back({"acceptance",
                 "the acceptance suite",
                 {{"criteria", "integer[]", false, "items to run, default 1 .. 12"},
                  {"n_large", "integer", false, "N of the large items, default 1e7"},
                  {"n_medium", "integer", false, "N of the recurrence items, default 1e6"},
                  {"compare_threads", "integer", false, "second thread count of item 12, default 8"}},
                 {{"task", "acceptance"}, {"criteria", {1}}}});
    return c;
}

// ---- parsing helpers --------------------------------------------------------

ObjectReader reader_for(const json &job, const TaskSpec &spec)
{
    std::vector<std::string> allowed{"task", "seed"};
    for (const auto &f : spec.fields)
        allowed.push_back(f.name);
    ObjectReader r(job, "", allowed);
    r.finish();
    for (const auto &f : spec.fields)
        if (f.required && !r.has(f.name))
            throw SchemaError("", "task \"" + spec.name + "\" needs field \"" + f.name + "\"");
    return r;
}

template <class F> auto at_pointer(const std::string &pointer, F f)
{
    try {
        return f();
    } catch (const SchemaError &) {
        throw;
    } catch (const std::exception &e) {
        throw SchemaError(pointer, e.what());
    }
}

double tolerance(const ObjectReader &r, double fallback)
{
    const double t = r.number("tolerance", fallback);
    if (!(t >= 0.0))
        throw SchemaError(r.path("tolerance"), "tolerance must be non-negative");
    return t;
}

AveragingScheme scheme_from(const ObjectReader &r)
{
    const std::int64_t n = r.integer("N");
    CheckpointRule rule = CheckpointRule::powers(2.0);
    std::string where = r.path("N");
    if (r.has("checkpoints")) {
        rule = CheckpointRule::explicit_points(r.integers("checkpoints"));
        where = r.path("checkpoints");
    } else if (r.has("gamma")) {
        rule = CheckpointRule::powers(r.number("gamma"));
        where = r.path("gamma");
    }
    if (r.has("averaging")) {
        ObjectReader a(r.at("averaging"), r.path("averaging"), {"kind", "w"});
        a.finish();
        const auto kind = a.string("kind");
        if (kind == "weighted") {
            const auto w = expr_from_json(a.at("w"), a.path("w"));
            return at_pointer(a.pointer(), [&] { return AveragingScheme::weighted(w, n, rule); });
        }
        if (kind != "full")
            throw SchemaError(a.path("kind"), "unknown averaging kind \"" + kind + "\"");
    }
    return at_pointer(where, [&] { return AveragingScheme::full(n, rule); });
}

CorrelationQuery inline_query(const ObjectReader &r)
{
    json q = {{"shifts", r.at("shifts")}, {"signs", r.at("signs")}};
    if (r.has("dilation"))
        q["dilation"] = r.at("dilation");
    return query_from_json(q, r.pointer());
}

std::vector<CorrelationQuery> exhaustive_from(const ObjectReader &r)
{
    ObjectReader e(r.at("exhaustive"), r.path("exhaustive"), {"s", "shift"});
    e.finish();
    const auto s = e.integer("s"), shift = e.integer("shift");
    if (s < 1 || s > 4 || shift < 0 || shift > 8)
        throw SchemaError(e.pointer(), "exhaustive sets need 1 <= s <= 4 and 0 <= shift <= 8");
    return exhaustive_queries(static_cast<int>(s), static_cast<int>(shift));
}

struct SourceBinding {
    std::shared_ptr<const ComplexSource> source;
    std::string description;
    std::optional<HardyExpr> expr;
};

SourceBinding source_from(const ObjectReader &r, const JobContext &ctx)
{
    if (r.has("expr") == r.has("source"))
        throw SchemaError(r.pointer(), "give exactly one of \"expr\" and \"source\"");
    if (r.has("expr")) {
        auto a = expr_from_json(r.at("expr"), r.path("expr"));
        return {std::make_shared<HardyPhase>(a), "e(" + a.str() + ")", a};
    }
    const std::string p = r.path("source");
    ObjectReader s(r.at("source"), p, {"kind", "expr", "weight", "system", "time", "frequencies", "start"});
    s.finish();
    const auto kind = s.string("kind");
    if (kind == "hardy") {
        auto a = expr_from_json(s.at("expr"), s.path("expr"));
        return {std::make_shared<HardyPhase>(a), "e(" + a.str() + ")", a};
    }
    if (kind == "weight") {
        auto w = weight_from_json(s.at("weight"), s.path("weight"), ctx.seed);
        return {make_weight(w), w.describe(), std::nullopt};
    }
    if (kind == "orbit") {
        auto sys = system_from_json(s.at("system"), s.path("system"));
        std::vector<std::int64_t> freqs = s.integers("frequencies");
        TimeFn time = [](std::int64_t n) { return n; };
        std::string desc = sys.describe() + " at n";
        std::int64_t start = 2;
        if (s.has("time")) {
            auto a = expr_from_json(s.at("time"), s.path("time"));
            time = floor_times(a, ctx.precision_bits);
            desc = sys.describe() + " at [" + a.str() + "]";
            start = a.n_start();
        }
        start = s.integer("start", start);
        auto src = at_pointer(p, [&] { return orbit_sample(sys, time, freqs, start); });
        return {src, desc, std::nullopt};
    }
    throw SchemaError(s.path("kind"), "unknown source kind \"" + kind + "\"");
}

std::optional<MeasureSpec> lambda_from(const ObjectReader &r, const Classification &cls)
{
    if (r.has("lambda"))
        return measure_from_json(r.at("lambda"), r.path("lambda"));
    if (cls.case_id == Case::I)
        return MeasureSpec::uniform();
    if (cls.case_id == Case::IV && cls.alpha)
        return MeasureSpec::point_mass(*cls.alpha);
    return std::nullopt;
}

std::string series_csv(const ComplexSeries &s) { return s.to_csv(); }

json series_summary(const ComplexSeries &s)
{
    return {{"N", s.final().n}, {"value", to_json(s.final().value)}, {"abs", std::abs(s.final().value)}};
}

// ---- tasks ------------------------------------------------------------------

TaskPlan plan_classify(const ObjectReader &r, const JobContext &)
{
    auto a = expr_from_json(r.at("expr"), r.path("expr"));
    return [a] {
        TaskOutput out;
        out.result = to_json(classify(a));
        out.result["expr"] = a.str();
        out.n_start = a.n_start();
        return out;
    };
}

TaskPlan plan_eval(const ObjectReader &r, const JobContext &ctx)
{
    auto a = expr_from_json(r.at("expr"), r.path("expr"));
    std::vector<std::int64_t> ns;
    if (r.at("n").is_array())
        ns = r.integers("n");
    else
        ns.push_back(r.integer("n"));
    for (std::size_t i = 0; i < ns.size(); ++i)
        if (ns[i] < a.n_start())
            throw SchemaError(r.at("n").is_array() ? child_pointer(r.path("n"), i) : r.path("n"),
                              "n below the domain start " + std::to_string(a.n_start()));
    const bool want_floor = r.boolean("floor", false);
    const int bits = ctx.precision_bits;
    return [a, ns, want_floor, bits] {
        TaskOutput out;
        out.n_start = a.n_start();
        json values = json::array();
        std::string csv = want_floor ? "n,frac,err_bound,floor\n" : "n,frac,err_bound\n";
        for (auto n : ns) {
            const auto f = eval_frac(a, n, bits);
            json v = {{"n", n}, {"frac", f.frac}, {"err_bound", f.err_bound}};
            csv += std::to_string(n) + "," + format_double(f.frac) + "," + format_double(f.err_bound);
            if (want_floor) {
                const auto fl = floor_time(a, n, bits);
                v["floor"] = fl;
                csv += "," + std::to_string(fl);
            }
            csv += "\n";
            values.push_back(v);
        }
        out.result = {{"expr", a.str()}, {"precision_bits", bits}, {"values", values}};
        out.files.push_back({"eval.csv", csv});
        return out;
    };
}

TaskPlan plan_correlate(const ObjectReader &r, const JobContext &ctx)
{
    auto src = source_from(r, ctx);
    auto q = inline_query(r);
    auto scheme = scheme_from(r);
    std::optional<std::complex<double>> prediction;
    if (src.expr) {
        const auto cls = classify(*src.expr);
        if (cls.case_id != Case::V)
            if (auto lambda = lambda_from(r, cls))
                prediction = predict_correlation(cls, *lambda, q);
    } else if (r.has("lambda")) {
        throw SchemaError(r.path("lambda"), "lambda applies to Hardy sources only");
    }
    const std::optional<double> tol = r.has("tolerance") ? std::optional(tolerance(r, 0.0)) : std::nullopt;
    if (tol && !prediction)
        throw SchemaError(r.path("tolerance"), "no oracle value to compare against");
    return [src, q, scheme, prediction, tol] {
        TaskOutput out;
        const auto s = scheme.kind() == AveragingScheme::Kind::weighted
                           ? throw BadScheme("correlations use Cesaro or subsequence averages")
                           : empirical_correlation(*src.source, q, scheme);
        out.n_start = src.source->start();
        const auto v = s.final().value;
        out.result = {{"source", src.description}, {"query", q.str()},      {"value_re", v.real()},
                      {"value_im", v.imag()},      {"N", s.final().n},      {"samples", s.final().samples}};
        if (prediction) {
            out.result["prediction"] = to_json(*prediction);
            if (tol) {
                Verdict vd;
                vd.experiment = "correlate";
                vd.params = {{"source", src.description}, {"query", q.str()}, {"N", std::to_string(s.final().n)}};
                vd.value = v;
                vd.reference = *prediction;
                vd.tolerance = *tol;
                vd.pass = std::abs(v - *prediction) <= *tol;
                out.verdicts.push_back(vd);
            }
        }
        out.files.push_back({"correlation.csv", series_csv(s)});
        return out;
    };
}

TaskPlan plan_predict(const ObjectReader &r, const JobContext &)
{
    auto a = expr_from_json(r.at("expr"), r.path("expr"));
    auto q = inline_query(r);
    const auto cls = classify(a);
    if (cls.case_id == Case::V)
        throw HypothesisUnmet(a.str() + " is in case V; predictions need case I to IV");
    auto lambda = lambda_from(r, cls);
    if (!lambda)
        throw SchemaError(r.pointer(), "case " + std::string(case_name(cls.case_id)) + " needs an explicit lambda");
    return [a, q, cls, lambda] {
        TaskOutput out;
        out.n_start = a.n_start();
        const auto v = predict_correlation(cls, *lambda, q);
        const auto ps = power_sum_condition(q, cls.d);
        const auto bc = binom_condition(q, cls.d);
        out.result = {{"case", std::string(case_name(cls.case_id))},
                      {"d", cls.d},
                      {"lambda", lambda->describe()},
                      {"query", q.str()},
                      {"value_re", v.real()},
                      {"value_im", v.imag()},
                      {"vanishes", ps.vanishes},
                      {"l_d", ps.l_d.get_str()},
                      {"c_d", bc.c_d.get_str()}};
        return out;
    };
}

TaskPlan plan_reconcile(const ObjectReader &r, const JobContext &)
{
    auto a = expr_from_json(r.at("expr"), r.path("expr"));
    std::vector<CorrelationQuery> qs;
    if (r.has("exhaustive")) {
        if (r.has("shifts") || r.has("signs"))
            throw SchemaError(r.pointer(), "give either a query or an exhaustive set");
        qs = exhaustive_from(r);
    } else {
        qs.push_back(inline_query(r));
    }
    const auto cls = classify(a);
    if (cls.case_id == Case::V)
        throw HypothesisUnmet(a.str() + " is in case V; reconciliation needs case I to IV");
    auto lambda = lambda_from(r, cls);
    if (!lambda)
        throw SchemaError(r.pointer(), "case " + std::string(case_name(cls.case_id)) + " needs an explicit lambda");
    return [a, qs, cls, lambda] {
        TaskOutput out;
        out.n_start = a.n_start();
        double worst = 0.0;
        std::size_t mismatches = 0;
        std::string csv = "query,prediction_re,prediction_im,model_re,model_im,match\n";
        for (const auto &q : qs) {
            const auto rec = model_reconciliation(cls, *lambda, q);
            worst = std::max(worst, std::abs(rec.prediction - rec.model));
            mismatches += !rec.match;
            csv += "\"" + q.str() + "\"," + format_double(rec.prediction.real()) + "," +
                   format_double(rec.prediction.imag()) + "," + format_double(rec.model.real()) + "," +
                   format_double(rec.model.imag()) + "," + (rec.match ? "1" : "0") + "\n";
        }
        out.result = {{"expr", a.str()},   {"d", cls.d},           {"lambda", lambda->describe()},
                      {"checked", qs.size()}, {"mismatches", mismatches}, {"worst", worst}};
        Verdict v;
        v.experiment = "reconcile";
        v.params = {{"expr", a.str()}, {"lambda", lambda->describe()}, {"queries", std::to_string(qs.size())}};
        v.value = worst;
        v.reference = 0.0;
        v.tolerance = 1e-12;
        v.pass = mismatches == 0;
        out.verdicts.push_back(v);
        out.files.push_back({"reconcile.csv", csv});
        return out;
    };
}

TaskPlan plan_measure(const ObjectReader &r, const JobContext &ctx)
{
    auto a = expr_from_json(r.at("expr"), r.path("expr"));
    const auto of = r.has("of") ? r.string("of") : std::string("lambda");
    if (of != "lambda" && of != "phase")
        throw SchemaError(r.path("of"), "expected \"lambda\" or \"phase\"");
    const int bins = static_cast<int>(std::clamp<std::int64_t>(r.integer("bins", default_bins), 0, 1 << 20));
    const int freqs = static_cast<int>(std::clamp<std::int64_t>(r.integer("frequencies", default_frequencies), 0, 1000));

    std::optional<std::pair<double, double>> search;
    if (r.has("checkpoint_search")) {
        ObjectReader s(r.at("checkpoint_search"), r.path("checkpoint_search"), {"alpha", "eps"});
        s.finish();
        search = {{s.number("alpha"), s.number("eps")}};
        if (of != "lambda")
            throw SchemaError(s.pointer(), "checkpoint search applies to lambda");
        if (r.has("N") || r.has("checkpoints") || r.has("gamma"))
            throw SchemaError(s.pointer(), "checkpoint_search replaces N and checkpoints");
    } else if (!r.has("N")) {
        throw SchemaError("", "task \"measure\" needs field \"N\" or \"checkpoint_search\"");
    }
    std::optional<AveragingScheme> scheme;
    if (!search)
        scheme = scheme_from(r);

    struct Tests {
        std::optional<std::pair<int, double>> uniformity;
        std::optional<double> density;
        std::optional<std::array<double, 3>> concentration; // alpha, window, min mass
        bool concentration_at_search = false;
    } tests;
    if (r.has("uniformity")) {
        ObjectReader u(r.at("uniformity"), r.path("uniformity"), {"K", "tolerance"});
        u.finish();
        tests.uniformity = {{static_cast<int>(std::clamp<std::int64_t>(u.integer("K", 5), 0, 1000)),
                             u.number("tolerance", 0.05)}};
        if (tests.uniformity->first < 1 || tests.uniformity->first > freqs)
            throw SchemaError(u.path("K"), "K must lie in [1, frequencies]");
    }
    if (r.has("density")) {
        ObjectReader d(r.at("density"), r.path("density"), {"C"});
        d.finish();
        tests.density = d.number("C", 2.0);
    }
    if (r.has("concentration")) {
        ObjectReader c(r.at("concentration"), r.path("concentration"), {"alpha", "window", "min_mass"});
        c.finish();
        double alpha = 0.0;
        if (c.has("alpha"))
            alpha = c.number("alpha");
        else if (search)
            alpha = search->first, tests.concentration_at_search = true;
        else
            throw SchemaError(c.pointer(), "missing required field \"alpha\"");
        tests.concentration = {{alpha, c.number("window", 0.05), c.number("min_mass", 0.9)}};
    }
    // argument checks of the builders, before any work
    at_pointer(r.pointer(), [&] {
        build_empirical_measure(*make_circle_source([](std::int64_t) { return 0.0; }), AveragingScheme::full(10),
                                bins, freqs);
        return 0;
    });
    if (of == "lambda")
        derivative_sequence(a, classify(a));
    (void)ctx;

    return [a, of, bins, freqs, search, scheme, tests] {
        TaskOutput out;
        out.n_start = a.n_start();
        AveragingScheme sc = scheme ? *scheme : AveragingScheme::full(10);
        std::optional<std::int64_t> found;
        if (search) {
            const auto c = derivative_sequence(a, classify(a));
            found = find_checkpoint_times(c, search->first, search->second, 1).front();
            const std::int64_t len = *found - a.n_start() + 1;
            sc = AveragingScheme::full(len, CheckpointRule::explicit_points({len}));
        }
        std::vector<MeasurePoint> pts;
        if (of == "lambda")
            pts = lambda_from_expr(a, sc, bins, freqs);
        else
            pts = build_empirical_measure(HardyFrac(a), sc, bins, freqs);
        const auto &m = pts.back().measure;
        json cps = json::array();
        for (const auto &p : pts)
            cps.push_back({{"N", p.n}, {"fourier_1", to_json(p.measure.coefficient(1))}});
        out.result = {{"expr", a.str()}, {"of", of}, {"bins", bins}, {"frequencies", freqs}, {"checkpoints", cps}};
        if (found)
            out.result["found_n"] = *found;
        auto verdict = [&](const std::string &name, double value, double ref, double tol, bool pass) {
            Verdict v;
            v.experiment = name;
            v.params = {{"expr", a.str()}, {"N", std::to_string(pts.back().n)}};
            v.value = value;
            v.reference = ref;
            v.tolerance = tol;
            v.pass = pass;
            out.verdicts.push_back(v);
        };
        if (tests.uniformity) {
            const auto u = uniformity_test(m, tests.uniformity->first, tests.uniformity->second);
            verdict("uniformity", u.worst_value, 0.0, tests.uniformity->second, u.pass);
        }
        if (tests.density) {
            const auto d = density_bound_check(m, *tests.density);
            verdict("density_bound", d.ratio, *tests.density, *tests.density, d.pass);
        }
        if (tests.concentration) {
            const auto &c = *tests.concentration;
            const double mass = concentration_test(m, c[0], c[1]);
            verdict("concentration", mass, c[2], c[2], mass >= c[2]);
        }
        out.files.push_back({"histogram.csv", m.histogram_csv()});
        out.files.push_back({"fourier.csv", m.fourier_csv()});
        return out;
    };
}

TaskPlan plan_sst(const ObjectReader &r, const JobContext &ctx)
{
    auto src = source_from(r, ctx);
    std::vector<CorrelationQuery> qs;
    if (r.has("queries") == r.has("exhaustive"))
        throw SchemaError(r.pointer(), "give exactly one of \"queries\" and \"exhaustive\"");
    if (r.has("queries")) {
        const auto &arr = r.at("queries");
        if (!arr.is_array() || arr.empty())
            throw SchemaError(r.path("queries"), "expected a non-empty array of queries");
        for (std::size_t i = 0; i < arr.size(); ++i)
            qs.push_back(query_from_json(arr[i], child_pointer(r.path("queries"), i)));
    } else {
        qs = exhaustive_from(r);
    }
    std::vector<int> dil{1, 2, 3};
    if (r.has("dilations")) {
        dil.clear();
        for (auto d : r.integers("dilations")) {
            if (d < 1 || d > 64)
                throw SchemaError(r.path("dilations"), "dilations must lie in [1, 64]");
            dil.push_back(static_cast<int>(d));
        }
        if (dil.empty())
            throw SchemaError(r.path("dilations"), "no dilations");
    }
    auto scheme = scheme_from(r);
    const double tol = tolerance(r, 0.05);
    return [src, qs, dil, scheme, tol] {
        TaskOutput out;
        out.n_start = src.source->start();
        auto res = sst_invariance(*src.source, qs, dil, scheme, tol);
        res.verdict.params.push_back({"source", src.description});
        std::string csv = "query,r,re,im,abs\n";
        for (const auto &row : res.rows)
            for (std::size_t j = 0; j < dil.size(); ++j)
                csv += "\"" + row.query.str() + "\"," + std::to_string(dil[j]) + "," +
                       format_double(row.values[j].real()) + "," + format_double(row.values[j].imag()) + "," +
                       format_double(std::abs(row.values[j])) + "\n";
        out.result = {{"source", src.description},
                      {"queries", qs.size()},
                      {"dilations", dil},
                      {"deviation", res.deviation},
                      {"worst_query", res.rows[res.worst].query.str()}};
        out.verdicts.push_back(res.verdict);
        out.files.push_back({"sst.csv", csv});
        return out;
    };
}

TaskPlan plan_ortho(const ObjectReader &r, const JobContext &ctx)
{
    auto a = expr_from_json(r.at("expr"), r.path("expr"));
    auto w = weight_from_json(r.at("weight"), r.path("weight"), ctx.seed);
    std::optional<Coefficient> fa;
    if (r.has("floor_alpha"))
        fa = coefficient_from_json(r.at("floor_alpha"), r.path("floor_alpha"));
    auto scheme = scheme_from(r);
    const double tol = tolerance(r, 0.05);
    return [a, w, fa, scheme, tol] {
        TaskOutput out;
        out.n_start = a.n_start();
        auto res = ortho_test(a, w, scheme, tol, fa);
        out.result = series_summary(res.series);
        out.verdicts.push_back(res.verdict);
        out.files.push_back({"ortho.csv", series_csv(res.series)});
        return out;
    };
}

TaskPlan plan_multiavg(const ObjectReader &r, const JobContext &)
{
    auto at = rotation_from_json(r.at("alpha_T"), r.path("alpha_T"));
    auto as = rotation_from_json(r.at("alpha_S"), r.path("alpha_S"));
    const auto f = r.integer("f"), g = r.integer("g");
    auto a = expr_from_json(r.at("expr"), r.path("expr"));
    auto scheme = scheme_from(r);
    const double tol = tolerance(r, 0.02);
    return [at, as, f, g, a, scheme, tol] {
        TaskOutput out;
        out.n_start = a.n_start();
        auto res = multi_ergodic_average(at, as, f, g, a, scheme, tol);
        out.result = series_summary(res.series);
        out.result["predicted"] = to_json(res.predicted);
        out.verdicts.push_back(res.verdict);
        out.files.push_back({"multiavg.csv", series_csv(res.series)});
        return out;
    };
}

TaskPlan plan_recurrence(const ObjectReader &r, const JobContext &)
{
    auto at = rotation_from_json(r.at("alpha_T"), r.path("alpha_T"));
    auto as = rotation_from_json(r.at("alpha_S"), r.path("alpha_S"));
    const double u = r.number("u"), v = r.number("v");
    if (!(0.0 <= u && u <= v && v <= 1.0))
        throw SchemaError(r.path("v"), "need 0 <= u <= v <= 1");
    auto a = expr_from_json(r.at("expr"), r.path("expr"));
    auto scheme = scheme_from(r);
    const double tol = tolerance(r, 0.01);
    const double slack = r.number("slack", 0.005);
    return [at, as, u, v, a, scheme, tol, slack] {
        TaskOutput out;
        out.n_start = a.n_start();
        auto res = recurrence_average(at, as, u, v, a, scheme, tol, slack);
        out.result = series_summary(res.series);
        out.result["bound"] = res.bound;
        out.verdicts.push_back(res.verdict);
        out.files.push_back({"recurrence.csv", series_csv(res.series)});
        return out;
    };
}

TaskPlan plan_equidist(const ObjectReader &r, const JobContext &)
{
    auto a = expr_from_json(r.at("expr"), r.path("expr"));
    ObjectReader b(r.at("beatty"), r.path("beatty"), {"alpha", "beta"});
    b.finish();
    const auto balpha = coefficient_from_json(b.at("alpha"), b.path("alpha"));
    const double beta = b.number("beta", 0.0);
    auto seq = at_pointer(b.pointer(), [&] { return BeattySequence(balpha, beta); });
    auto alpha = rotation_from_json(r.at("alpha"), r.path("alpha"));
    const int k = static_cast<int>(std::clamp<std::int64_t>(r.integer("K", 3), -1, 1000));
    const int q = static_cast<int>(std::clamp<std::int64_t>(r.integer("q_max", 5), -1, 1000));
    if (k < 1 || k > 64)
        throw SchemaError(r.path("K"), "K must lie in [1, 64]");
    if (q < 1 || q > 64)
        throw SchemaError(r.path("q_max"), "q_max must lie in [1, 64]");
    const auto n = r.integer("N");
    if (n < min_checkpoint || n > max_checkpoint)
        throw SchemaError(r.path("N"), "N outside [10, 1e9]");
    const double tol = tolerance(r, 0.05);
    const double rtol = r.number("residue_tolerance", 0.01);
    return [a, seq, alpha, k, q, n, tol, rtol] {
        TaskOutput out;
        out.n_start = a.n_start();
        auto rep = equidist_along(a, seq, alpha, k, n, tol, rtol, q);
        std::string weyl = "k,weyl_re,weyl_im,weyl_abs,floor_re,floor_im,floor_abs\n";
        for (std::size_t i = 0; i < rep.weyl.size(); ++i)
            weyl += std::to_string(i + 1) + "," + format_double(rep.weyl[i].real()) + "," +
                    format_double(rep.weyl[i].imag()) + "," + format_double(std::abs(rep.weyl[i])) + "," +
                    format_double(rep.floor[i].real()) + "," + format_double(rep.floor[i].imag()) + "," +
                    format_double(std::abs(rep.floor[i])) + "\n";
        std::string res = "q,class,frequency\n";
        json residues = json::object();
        for (const auto &[m, freq] : rep.residues) {
            residues[std::to_string(m)] = freq;
            for (std::size_t c = 0; c < freq.size(); ++c)
                res += std::to_string(m) + "," + std::to_string(c) + "," + format_double(freq[c]) + "\n";
        }
        out.result = {{"weyl_sup", rep.weyl_sup},
                      {"floor_sup", rep.floor_sup},
                      {"residue_deviation", rep.residue_deviation},
                      {"residues", residues}};
        out.verdicts.push_back(rep.verdict);
        out.files.push_back({"weyl.csv", weyl});
        out.files.push_back({"residues.csv", res});
        return out;
    };
}

TaskPlan plan_joint(const ObjectReader &r, const JobContext &)
{
    auto a = expr_from_json(r.at("expr"), r.path("expr"));
    auto alpha = coefficient_from_json(r.at("alpha"), r.path("alpha"));
    auto q1 = query_from_json(r.at("q1"), r.path("q1"));
    auto q2 = query_from_json(r.at("q2"), r.path("q2"));
    auto scheme = scheme_from(r);
    const double tol = tolerance(r, 0.07);
    return [a, alpha, q1, q2, scheme, tol] {
        TaskOutput out;
        out.n_start = a.n_start();
        auto res = joint_factorization_test(a, alpha, q1, q2, scheme, tol);
        out.result = {{"joint", to_json(res.joint)}, {"product", to_json(res.product)}, {"deviation", res.deviation}};
        out.verdicts.push_back(res.verdict);
        return out;
    };
}

TaskPlan plan_floorseq(const ObjectReader &r, const JobContext &)
{
    auto a = expr_from_json(r.at("expr"), r.path("expr"));
    auto alpha = coefficient_from_json(r.at("alpha"), r.path("alpha"));
    auto q = query_from_json(r.at("query"), r.path("query"));
    auto scheme = scheme_from(r);
    const double tol = tolerance(r, 0.05);
    return [a, alpha, q, scheme, tol] {
        TaskOutput out;
        out.n_start = a.n_start();
        auto res = floor_sequence_correlation(a, alpha, q, scheme, tol);
        out.result = series_summary(res.series);
        out.result["crosscheck"] = res.crosscheck;
        out.result["drift"] = res.drift;
        out.verdicts.push_back(res.verdict);
        out.files.push_back({"floorseq.csv", series_csv(res.series)});
        return out;
    };
}

TaskPlan plan_acceptance(const ObjectReader &r, const JobContext &ctx)
{
    std::vector<int> ids;
    if (r.has("criteria")) {
        for (auto id : r.integers("criteria")) {
            if (id < 1 || id > criterion_count)
                throw SchemaError(r.path("criteria"), "criteria are numbered 1 .. 12");
            ids.push_back(static_cast<int>(id));
        }
    } else {
        for (int id = 1; id <= criterion_count; ++id)
            ids.push_back(id);
    }
    AcceptanceOptions opt;
    opt.n_large = r.integer("n_large", opt.n_large);
    opt.n_medium = r.integer("n_medium", opt.n_medium);
    opt.compare_threads = static_cast<int>(std::clamp<std::int64_t>(r.integer("compare_threads", 8), 0, 4096));
    for (const char *key : {"n_large", "n_medium"}) {
        const auto n = r.integer(key, 1000000);
        if (n < min_checkpoint || n > max_checkpoint)
            throw SchemaError(r.path(key), "N outside [10, 1e9]");
    }
    opt.seed = ctx.seed;
    opt.precision_bits = ctx.precision_bits;
    return [ids, opt] {
        TaskOutput out;
        json items = json::array();
        std::string text;
        for (int id : ids) {
            auto c = run_criterion(id, opt);
            text += summary_line(c) + "\n";
            items.push_back({{"id", c.id}, {"title", c.title}, {"pass", c.pass}, {"detail", c.detail}});
            for (auto v : c.verdicts) {
                v.params.insert(v.params.begin(), {"criterion", std::to_string(id)});
                out.verdicts.push_back(v);
            }
        }
        out.result = {{"criteria", items}};
        out.files.push_back({"acceptance.txt", text});
        return out;
    };
}

using Planner = TaskPlan (*)(const ObjectReader &, const JobContext &);

const std::map<std::string, Planner> &planners()
{
    static const std::map<std::string, Planner> m = {
        {"classify", plan_classify},   {"eval", plan_eval},         {"correlate", plan_correlate},
        {"predict", plan_predict},     {"reconcile", plan_reconcile}, {"measure", plan_measure},
        {"sst", plan_sst},             {"ortho", plan_ortho},       {"multiavg", plan_multiavg},
        {"recurrence", plan_recurrence}, {"equidist", plan_equidist}, {"joint", plan_joint},
        {"floorseq", plan_floorseq},   {"acceptance", plan_acceptance}};
    return m;
}

// ---- line lookup ------------------------------------------------------------

struct Locator {
    std::string_view s;
    std::size_t i = 0;
    int line = 1;
    std::map<std::string, int> lines;

    bool more() const { return i < s.size(); }
    void ws()
    {
        while (more() && std::isspace(static_cast<unsigned char>(s[i]))) {
            if (s[i] == '\n')
                ++line;
            ++i;
        }
    }
    std::string str()
    {
        std::string out;
        ++i;
        while (more() && s[i] != '"') {
            if (s[i] == '\\' && i + 1 < s.size()) {
                ++i;
                if (s[i] == 'u') {
                    i += 4;
                    out += '?';
                } else {
                    out += s[i] == 'n' ? '\n' : s[i] == 't' ? '\t' : s[i];
                }
            } else {
                out += s[i];
            }
            ++i;
        }
        ++i;
        return out;
    }
    void value(const std::string &ptr)
    {
        ws();
        if (!more())
            return;
        lines.emplace(ptr, line);
        if (s[i] == '{') {
            ++i;
            for (;;) {
                ws();
                if (!more() || s[i] == '}') {
                    ++i;
                    return;
                }
                if (s[i] == ',') {
                    ++i;
                    continue;
                }
                const auto key = str();
                ws();
                ++i; // ':'
                value(child_pointer(ptr, key));
            }
        }
        if (s[i] == '[') {
            ++i;
            std::size_t k = 0;
            for (;;) {
                ws();
                if (!more() || s[i] == ']') {
                    ++i;
                    return;
                }
                if (s[i] == ',') {
                    ++i;
                    continue;
                }
                value(child_pointer(ptr, k++));
            }
        }
        if (s[i] == '"') {
            str();
            return;
        }
        while (more() && s[i] != ',' && s[i] != '}' && s[i] != ']' && !std::isspace(static_cast<unsigned char>(s[i])))
            ++i;
    }
};

int line_at_byte(std::string_view text, std::size_t byte)
{
    byte = std::min(byte, text.size());
    return 1 + static_cast<int>(std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(byte), '\n'));
}

void write_file(const std::filesystem::path &p, const std::string &contents)
{
    std::ofstream f(p, std::ios::binary);
    if (!f)
        throw std::runtime_error("cannot write " + p.string());
    f << contents;
}

std::string error_type(const std::exception &e)
{
    std::string what = e.what();
    if (dynamic_cast<const Error *>(&e)) {
        auto colon = what.find(':');
        if (colon != std::string::npos)
            return what.substr(0, colon);
    }
    if (dynamic_cast<const std::invalid_argument *>(&e))
        return "InvalidArgument";
    return "Error";
}

} // namespace

const std::vector<TaskSpec> &list_tasks()
{
    static const std::vector<TaskSpec> c = build_catalog();
    return c;
}

json task_catalog()
{
    json out = json::array();
    for (const auto &t : list_tasks()) {
        json fields = json::array();
        for (const auto &f : t.fields)
            fields.push_back({{"name", f.name}, {"type", f.type}, {"required", f.required}, {"help", f.help}});
        out.push_back({{"task", t.name}, {"summary", t.summary}, {"fields", fields}, {"example", t.example}});
    }
    return out;
}

TaskPlan plan_job(const json &job, const JobContext &ctx)
{
    if (!job.is_object())
        throw SchemaError("", "a job is a JSON object");
    if (!job.contains("task"))
        throw SchemaError("", "missing required field \"task\"");
    const auto name = as_string(job.at("task"), "/task");
    const auto &tasks = list_tasks();
    auto spec = std::find_if(tasks.begin(), tasks.end(), [&](const TaskSpec &t) { return t.name == name; });
    if (spec == tasks.end())
        throw SchemaError("/task", "unknown task \"" + name + "\"");
    if (job.contains("seed")) {
        const auto &s = job.at("seed");
        if (!s.is_number_integer() || (!s.is_number_unsigned() && s.get<std::int64_t>() < 0))
            throw SchemaError("/seed", "seed must be a non-negative integer");
    }
    const ObjectReader r = reader_for(job, *spec);
    return planners().at(name)(r, ctx);
}

int json_line(std::string_view text, const std::string &pointer)
{
    Locator loc;
    loc.s = text;
    loc.value("");
    std::string p = pointer;
    for (;;) {
        auto it = loc.lines.find(p);
        if (it != loc.lines.end())
            return it->second;
        if (p.empty())
            return 1;
        p.erase(p.rfind('/'));
    }
}

int run_job_text(const std::string &text, const std::string &label, const RunOptions &opt, std::ostream &log)
{
    json job;
    try {
        job = json::parse(text);
    } catch (const json::parse_error &e) {
        log << label << ":" << line_at_byte(text, e.byte == 0 ? 0 : e.byte - 1) << ": invalid JSON: " << e.what()
            << "\n";
        return exit_schema;
    }
    if (opt.precision_bits < 64 || opt.precision_bits > 1024) {
        log << "precision bits must lie in [64, 1024]\n";
        return exit_schema;
    }
    JobContext ctx;
    ctx.precision_bits = opt.precision_bits;
    if (job.is_object() && job.contains("seed") && job["seed"].is_number_integer() &&
        (job["seed"].is_number_unsigned() || job["seed"].get<std::int64_t>() >= 0))
        ctx.seed = job["seed"].get<std::uint64_t>();
    if (opt.seed)
        ctx.seed = *opt.seed;

    const std::string task = job.is_object() && job.contains("task") && job["task"].is_string()
                                 ? job["task"].get<std::string>()
                                 : std::string();
    std::filesystem::create_directories(opt.out);
    set_thread_count(opt.threads);

    json results = {{"task", task}, {"job", job}, {"seed", ctx.seed}, {"precision_bits", ctx.precision_bits}};
    json manifest = {{"version", FLAB_VERSION},
                     {"precision_bits", ctx.precision_bits},
                     {"seed", ctx.seed},
                     {"threads", opt.threads},
                     {"task", task},
                     {"job", label}};
    int code = exit_pass;
    std::vector<std::string> files;
    try {
        TaskPlan plan;
        try {
            plan = plan_job(job, ctx);
        } catch (const SchemaError &e) {
            log << label << ":" << json_line(text, e.pointer()) << ": " << (e.pointer().empty() ? "/" : e.pointer())
                << ": " << e.what() << "\n";
            return exit_schema;
        }
        TaskOutput out = plan();
        json verdicts = json::array();
        bool pass = true;
        for (const auto &v : out.verdicts) {
            verdicts.push_back(to_json(v));
            pass = pass && v.pass;
        }
        for (const auto &[name, contents] : out.files) {
            write_file(opt.out / name, contents);
            files.push_back(name);
        }
        results["result"] = out.result;
        results["verdicts"] = verdicts;
        results["pass"] = pass;
        results["files"] = files;
        manifest["n_start"] = out.n_start;
        code = pass ? exit_pass : exit_error;
        log << task << ": " << out.verdicts.size() << " verdicts, " << (pass ? "all pass" : "FAIL") << "\n";
    } catch (const HypothesisUnmet &e) {
        results["error"] = {{"type", error_type(e)}, {"message", e.what()}};
        log << task << ": refused: " << e.what() << "\n";
        code = exit_refused;
    } catch (const std::exception &e) {
        results["error"] = {{"type", error_type(e)}, {"message", e.what()}};
        log << task << ": error: " << e.what() << "\n";
        code = exit_error;
    }
    if (!manifest.contains("n_start"))
        manifest["n_start"] = nullptr;
    manifest["files"] = files;
    manifest["exit_code"] = code;
    write_file(opt.out / "results.json", results.dump(2) + "\n");
    write_file(opt.out / "manifest.json", manifest.dump(2) + "\n");
    return code;
}

int run_job(const std::filesystem::path &job_file, const RunOptions &opt, std::ostream &log)
{
    std::ifstream f(job_file, std::ios::binary);
    if (!f) {
        log << job_file.string() << ": cannot read\n";
        return exit_error;
    }
    std::ostringstream s;
    s << f.rdbuf();
    return run_job_text(s.str(), job_file.string(), opt, log);
}

} // namespace flab
