#include "flab/serialize.hpp"

#include <algorithm>
#include <cmath>

#include "flab/errors.hpp"

namespace flab {

namespace {

std::string type_name(const json &j)
{
    return j.type_name();
}

[[noreturn]] void wrong_type(const json &j, const std::string &pointer, const char *expected)
{
    throw SchemaError(pointer, std::string("expected ") + expected + ", found " + type_name(j));
}

std::string escape(const std::string &key)
{
    std::string out;
    for (char c : key) {
        if (c == '~')
            out += "~0";
        else if (c == '/')
            out += "~1";
        else
            out += c;
    }
    return out;
}

template <class F> auto guarded(const std::string &pointer, F f)
{
    try {
        return f();
    } catch (const SchemaError &) {
        throw;
    } catch (const std::exception &e) {
        throw SchemaError(pointer, e.what());
    }
}

json complex_or_null(std::complex<double> z)
{
    if (std::isnan(z.real()) || std::isnan(z.imag()))
        return nullptr;
    return to_json(z);
}

} // namespace

std::string child_pointer(const std::string &pointer, const std::string &key) { return pointer + "/" + escape(key); }

std::string child_pointer(const std::string &pointer, std::size_t index)
{
    return pointer + "/" + std::to_string(index);
}

ObjectReader::ObjectReader(const json &j, std::string pointer, std::vector<std::string> allowed)
    : _j(j), _pointer(std::move(pointer)), _allowed(std::move(allowed))
{
    if (!j.is_object())
        wrong_type(j, _pointer, "object");
}

bool ObjectReader::has(const std::string &key) const { return _j.contains(key); }

const json &ObjectReader::at(const std::string &key) const
{
    auto it = _j.find(key);
    if (it == _j.end())
        throw SchemaError(_pointer, "missing required field \"" + key + "\"");
    return *it;
}

void ObjectReader::finish() const
{
    for (auto it = _j.begin(); it != _j.end(); ++it)
        if (std::find(_allowed.begin(), _allowed.end(), it.key()) == _allowed.end())
            throw SchemaError(path(it.key()), "unknown field \"" + it.key() + "\"");
}

std::string ObjectReader::string(const std::string &key) const { return as_string(at(key), path(key)); }

std::int64_t ObjectReader::integer(const std::string &key) const { return as_integer(at(key), path(key)); }

std::int64_t ObjectReader::integer(const std::string &key, std::int64_t fallback) const
{
    return has(key) ? integer(key) : fallback;
}

double ObjectReader::number(const std::string &key) const { return as_number(at(key), path(key)); }

double ObjectReader::number(const std::string &key, double fallback) const
{
    return has(key) ? number(key) : fallback;
}

bool ObjectReader::boolean(const std::string &key, bool fallback) const
{
    if (!has(key))
        return fallback;
    const auto &j = at(key);
    if (!j.is_boolean())
        wrong_type(j, path(key), "boolean");
    return j.get<bool>();
}

std::vector<std::int64_t> ObjectReader::integers(const std::string &key) const
{
    return as_integers(at(key), path(key));
}

std::string as_string(const json &j, const std::string &pointer)
{
    if (!j.is_string())
        wrong_type(j, pointer, "string");
    return j.get<std::string>();
}

std::int64_t as_integer(const json &j, const std::string &pointer)
{
    if (j.is_number_unsigned()) {
        const auto u = j.get<std::uint64_t>();
        if (u > static_cast<std::uint64_t>(INT64_MAX))
            throw SchemaError(pointer, "integer out of range");
        return static_cast<std::int64_t>(u);
    }
    if (!j.is_number_integer())
        wrong_type(j, pointer, "integer");
    return j.get<std::int64_t>();
}

double as_number(const json &j, const std::string &pointer)
{
    if (!j.is_number())
        wrong_type(j, pointer, "number");
    return j.get<double>();
}

std::vector<std::int64_t> as_integers(const json &j, const std::string &pointer)
{
    if (!j.is_array())
        wrong_type(j, pointer, "array of integers");
    std::vector<std::int64_t> out;
    for (std::size_t i = 0; i < j.size(); ++i)
        out.push_back(as_integer(j[i], child_pointer(pointer, i)));
    return out;
}

HardyExpr expr_from_json(const json &j, const std::string &pointer)
{
    const auto text = as_string(j, pointer);
    return guarded(pointer, [&] { return HardyExpr::parse(text); });
}

Coefficient coefficient_from_json(const json &j, const std::string &pointer)
{
    if (j.is_number_integer())
        return Coefficient(as_integer(j, pointer));
    if (!j.is_string())
        wrong_type(j, pointer, "coefficient string or integer");
    const auto text = j.get<std::string>();
    return guarded(pointer, [&] { return parse_coefficient(text); });
}

RotationNumber rotation_from_json(const json &j, const std::string &pointer)
{
    if (j.is_number_float()) {
        const double x = j.get<double>();
        if (!std::isfinite(x))
            throw SchemaError(pointer, "rotation number must be finite");
        return RotationNumber(x);
    }
    return RotationNumber(coefficient_from_json(j, pointer));
}

CorrelationQuery query_from_json(const json &j, const std::string &pointer)
{
    ObjectReader r(j, pointer, {"shifts", "signs", "dilation"});
    r.finish();
    CorrelationQuery q;
    for (auto s : r.integers("shifts"))
        q.shifts.push_back(static_cast<int>(std::clamp<std::int64_t>(s, -1000000, 1000000)));
    for (auto s : r.integers("signs"))
        q.signs.push_back(static_cast<int>(std::clamp<std::int64_t>(s, -2, 2)));
    q.dilation = static_cast<int>(std::clamp<std::int64_t>(r.integer("dilation", 1), -1000000, 1000000));
    guarded(pointer, [&] {
        q.validate();
        return 0;
    });
    return q;
}

MeasureSpec measure_from_json(const json &j, const std::string &pointer)
{
    ObjectReader r(j, pointer, {"kind", "alpha", "table"});
    r.finish();
    const auto kind = r.string("kind");
    if (kind == "uniform")
        return MeasureSpec::uniform();
    if (kind == "point_mass")
        return MeasureSpec::point_mass(coefficient_from_json(r.at("alpha"), r.path("alpha")));
    if (kind == "fourier_table") {
        const auto &t = r.at("table");
        const auto tp = r.path("table");
        if (!t.is_array())
            wrong_type(t, tp, "array of [k, re, im]");
        std::map<std::int64_t, std::complex<double>> table;
        for (std::size_t i = 0; i < t.size(); ++i) {
            const auto ep = child_pointer(tp, i);
            if (!t[i].is_array() || t[i].size() != 3)
                throw SchemaError(ep, "expected [k, re, im]");
            table[as_integer(t[i][0], child_pointer(ep, 0))] = {as_number(t[i][1], child_pointer(ep, 1)),
                                                                 as_number(t[i][2], child_pointer(ep, 2))};
        }
        return guarded(tp, [&] { return MeasureSpec::fourier_table(table); });
    }
    throw SchemaError(r.path("kind"), "unknown measure kind \"" + kind + "\"");
}

WeightSpec weight_from_json(const json &j, const std::string &pointer, std::uint64_t default_seed)
{
    ObjectReader r(j, pointer, {"kind", "alpha", "u", "v", "seed", "a"});
    r.finish();
    const auto kind = r.string("kind");
    auto alpha = [&] { return coefficient_from_json(r.at("alpha"), r.path("alpha")); };
    WeightSpec w;
    if (kind == "exp_linear")
        w = WeightSpec::exp_linear(alpha());
    else if (kind == "exp_quadratic")
        w = WeightSpec::exp_quadratic(alpha());
    else if (kind == "riemann_sample")
        w = WeightSpec::riemann_sample(alpha(), r.number("u"), r.number("v"));
    else if (kind == "bernoulli") {
        std::uint64_t seed = default_seed;
        if (r.has("seed")) {
            const auto &s = r.at("seed");
            if (!s.is_number_integer() || (!s.is_number_unsigned() && s.get<std::int64_t>() < 0))
                wrong_type(s, r.path("seed"), "non-negative integer");
            seed = s.get<std::uint64_t>();
        }
        w = WeightSpec::bernoulli(seed);
    } else if (kind == "floor_power")
        w = WeightSpec::floor_power(expr_from_json(r.at("a"), r.path("a")), alpha());
    else
        throw SchemaError(r.path("kind"), "unknown weight kind \"" + kind + "\"");
    guarded(pointer, [&] { return make_weight(w); });
    return w;
}

TorusSystem system_from_json(const json &j, const std::string &pointer)
{
    ObjectReader r(j, pointer, {"kind", "alpha", "y", "factors", "d", "lambda"});
    r.finish();
    const auto kind = r.string("kind");
    if (kind == "rotation") {
        const auto alpha = rotation_from_json(r.at("alpha"), r.path("alpha"));
        const double y = r.number("y", 0.0);
        return guarded(pointer, [&] { return TorusSystem::rotation(alpha, y); });
    }
    if (kind == "product") {
        const auto &f = r.at("factors");
        if (!f.is_array())
            wrong_type(f, r.path("factors"), "array of systems");
        std::vector<TorusSystem> factors;
        for (std::size_t i = 0; i < f.size(); ++i)
            factors.push_back(system_from_json(f[i], child_pointer(r.path("factors"), i)));
        return guarded(pointer, [&] { return TorusSystem::product(std::move(factors)); });
    }
    if (kind == "unipotent") {
        const int d = static_cast<int>(std::clamp<std::int64_t>(r.integer("d"), -1, 1000));
        const auto lambda = r.has("lambda") ? measure_from_json(r.at("lambda"), r.path("lambda")) : MeasureSpec::uniform();
        std::vector<double> y;
        if (r.has("y")) {
            const auto &yj = r.at("y");
            if (!yj.is_array())
                wrong_type(yj, r.path("y"), "array of numbers");
            for (std::size_t i = 0; i < yj.size(); ++i)
                y.push_back(as_number(yj[i], child_pointer(r.path("y"), i)));
        } else {
            y.assign(static_cast<std::size_t>(std::max(d, 0) + 1), 0.0);
        }
        return guarded(pointer, [&] { return TorusSystem::unipotent({d, lambda}, y); });
    }
    throw SchemaError(r.path("kind"), "unknown system kind \"" + kind + "\"");
}

json to_json(std::complex<double> z) { return {{"re", z.real()}, {"im", z.imag()}}; }

json to_json(const CorrelationQuery &q) { return {{"shifts", q.shifts}, {"signs", q.signs}, {"dilation", q.dilation}}; }

json to_json(const MeasureSpec &m)
{
    switch (m.kind()) {
    case MeasureSpec::Kind::uniform: return {{"kind", "uniform"}};
    case MeasureSpec::Kind::point_mass: return {{"kind", "point_mass"}, {"alpha", m.alpha().to_double()}};
    case MeasureSpec::Kind::fourier_table: {
        json table = json::array();
        for (std::int64_t k = -m.table_range(); k <= m.table_range(); ++k) {
            if (k == 0)
                continue;
            const auto z = m.fourier(mpz_class(static_cast<long>(k)));
            table.push_back({k, z.real(), z.imag()});
        }
        return {{"kind", "fourier_table"}, {"table", table}};
    }
    }
    return {};
}

json to_json(const WeightSpec &w)
{
    switch (w.kind) {
    case WeightSpec::Kind::exp_linear: return {{"kind", "exp_linear"}, {"alpha", w.alpha.str()}};
    case WeightSpec::Kind::exp_quadratic: return {{"kind", "exp_quadratic"}, {"alpha", w.alpha.str()}};
    case WeightSpec::Kind::riemann_sample:
        return {{"kind", "riemann_sample"}, {"alpha", w.alpha.str()}, {"u", w.u}, {"v", w.v}};
    case WeightSpec::Kind::bernoulli: return {{"kind", "bernoulli"}, {"seed", w.seed}};
    case WeightSpec::Kind::floor_power: return {{"kind", "floor_power"}, {"a", w.a.str()}, {"alpha", w.alpha.str()}};
    }
    return {};
}

json to_json(const TorusSystem &s)
{
    switch (s.kind()) {
    case TorusSystem::Kind::rotation:
        return {{"kind", "rotation"}, {"alpha", s.alpha().value()}, {"y", s.initial_point().front()}};
    case TorusSystem::Kind::unipotent:
        return {{"kind", "unipotent"}, {"d", s.model().d}, {"lambda", to_json(s.model().lambda)},
                {"y", s.initial_point()}};
    case TorusSystem::Kind::product: {
        json f = json::array();
        for (const auto &x : s.factors())
            f.push_back(to_json(x));
        return {{"kind", "product"}, {"factors", f}};
    }
    }
    return {};
}

json to_json(const Classification &c)
{
    json j = {{"case", std::string(case_name(c.case_id))}, {"d", c.d}, {"summary", c.str()}};
    if (c.alpha)
        j["alpha"] = c.alpha->str();
    if (c.case_id == Case::V) {
        j["poly_part"] = c.poly_part.str();
        j["modulus"] = c.modulus;
        j["inner"] = c.inner ? to_json(*c.inner) : json(nullptr);
    }
    return j;
}

json to_json(const Verdict &v)
{
    json params = json::object();
    for (const auto &[k, x] : v.params)
        params[k] = x;
    json j = {{"experiment", v.experiment},
              {"params", params},
              {"value", complex_or_null(v.value)},
              {"reference", complex_or_null(v.reference)},
              {"tolerance", v.tolerance},
              {"pass", v.pass}};
    if (!v.note.empty())
        j["note"] = v.note;
    return j;
}

} // namespace flab
