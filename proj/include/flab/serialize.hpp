#pragma once

#include <complex>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

#include "flab/experiments.hpp"
#include "flab/oracle.hpp"

namespace flab {

using json = nlohmann::json;

// A job value that does not fit the schema; `pointer` locates it (RFC 6901).
class SchemaError : public std::runtime_error {
public:
    SchemaError(std::string pointer, const std::string &what)
        : std::runtime_error(what), _pointer(std::move(pointer))
    {
    }
    const std::string &pointer() const { return _pointer; }

private:
    std::string _pointer;
};

std::string child_pointer(const std::string &pointer, const std::string &key);
std::string child_pointer(const std::string &pointer, std::size_t index);

// Typed access to one JSON object. Keys outside `allowed` are rejected by finish().
class ObjectReader {
public:
    ObjectReader(const json &j, std::string pointer, std::vector<std::string> allowed);

    bool has(const std::string &key) const;
    const json &at(const std::string &key) const; // throws SchemaError when missing
    std::string path(const std::string &key) const { return child_pointer(_pointer, key); }
    const std::string &pointer() const { return _pointer; }
    void finish() const;

    std::string string(const std::string &key) const;
    std::int64_t integer(const std::string &key) const;
    std::int64_t integer(const std::string &key, std::int64_t fallback) const;
    double number(const std::string &key) const;
    double number(const std::string &key, double fallback) const;
    bool boolean(const std::string &key, bool fallback) const;
    std::vector<std::int64_t> integers(const std::string &key) const;

private:
    const json &_j;
    std::string _pointer;
    std::vector<std::string> _allowed;
};

std::string as_string(const json &j, const std::string &pointer);
std::int64_t as_integer(const json &j, const std::string &pointer);
double as_number(const json &j, const std::string &pointer);
std::vector<std::int64_t> as_integers(const json &j, const std::string &pointer);

/// Parser and domain errors are reported as SchemaError at `pointer`.
HardyExpr expr_from_json(const json &j, const std::string &pointer);
/// A string such as "sqrt2" or "3/2", or an integer.
Coefficient coefficient_from_json(const json &j, const std::string &pointer);
/// A coefficient string or any number.
RotationNumber rotation_from_json(const json &j, const std::string &pointer);
/// {"shifts": [...], "signs": [...], "dilation": r}, validated.
CorrelationQuery query_from_json(const json &j, const std::string &pointer);
/// {"kind": "uniform"} | {"kind": "point_mass", "alpha": ...} | {"kind": "fourier_table", "table": [[k, re, im], ...]}
MeasureSpec measure_from_json(const json &j, const std::string &pointer);
/// Bernoulli weights without a "seed" take `default_seed`.
WeightSpec weight_from_json(const json &j, const std::string &pointer, std::uint64_t default_seed);
/// {"kind": "rotation", "alpha", "y"} | {"kind": "product", "factors"} | {"kind": "unipotent", "d", "lambda", "y"}
TorusSystem system_from_json(const json &j, const std::string &pointer);

json to_json(std::complex<double> z);
json to_json(const CorrelationQuery &q);
json to_json(const MeasureSpec &m);
json to_json(const WeightSpec &w);
json to_json(const TorusSystem &s);
json to_json(const Classification &c);
json to_json(const Verdict &v);

} // namespace flab
