#include <algorithm>
#include <charconv>
#include <cmath>

#include "dradapt/error.hpp"
#include "dradapt/hyperparams.hpp"

namespace dradapt {

void HyperparamSpace::validate() const {
    for (const auto& d : dims) {
        if (!(d.lower < d.upper)) throw ValidationError("dimension '" + d.name + "' needs lower < upper");
        if (d.type == ParamType::Integer && (d.lower != std::floor(d.lower) || d.upper != std::floor(d.upper)))
            throw ValidationError("integer dimension '" + d.name + "' needs integral bounds");
        if (d.type == ParamType::LogReal && d.lower <= 0.0)
            throw ValidationError("log-real dimension '" + d.name + "' needs positive bounds");
    }
}

void validate_assignment(const HyperparamSpace& space, const HyperparamAssignment& h) {
    for (const auto& d : space.dims) {
        const auto it = h.find(d.name);
        if (it == h.end()) throw ValidationError("hyperparameter '" + d.name + "' is not assigned");
        const double v = it->second;
        if (!std::isfinite(v) || v < d.lower || v > d.upper) {
            throw ValidationError("hyperparameter '" + d.name + "'=" + std::to_string(v) +
                                  " outside [" + std::to_string(d.lower) + ", " +
                                  std::to_string(d.upper) + "]");
        }
        if (d.type == ParamType::Integer && v != std::floor(v))
            throw ValidationError("hyperparameter '" + d.name + "' must be an integer");
    }
    for (const auto& [name, value] : h) {
        const bool known = std::any_of(space.dims.begin(), space.dims.end(),
                                       [&](const ParamDimension& d) { return d.name == name; });
        if (!known) throw ValidationError("unknown hyperparameter '" + name + "'");
    }
}

HyperparamAssignment decode(const HyperparamSpace& space, const std::vector<double>& unit) {
    if (unit.size() != space.size()) throw ValidationError("unit point has wrong arity");
    HyperparamAssignment h;
    for (std::size_t i = 0; i < space.size(); ++i) {
        const auto& d = space.dims[i];
        const double u = std::clamp(unit[i], 0.0, 1.0);
        double v = 0.0;
        switch (d.type) {
            case ParamType::Real: v = d.lower + u * (d.upper - d.lower); break;
            case ParamType::LogReal:
                v = std::exp(std::log(d.lower) + u * (std::log(d.upper) - std::log(d.lower)));
                break;
            case ParamType::Integer:
                v = std::floor(d.lower + u * (d.upper - d.lower + 1.0));
                break;
        }
        h[d.name] = std::clamp(v, d.lower, d.upper);
    }
    return h;
}

std::vector<double> encode(const HyperparamSpace& space, const HyperparamAssignment& h) {
    std::vector<double> unit;
    unit.reserve(space.size());
    for (const auto& d : space.dims) {
        const double v = h.at(d.name);
        double u = 0.0;
        switch (d.type) {
            case ParamType::Real: u = (v - d.lower) / (d.upper - d.lower); break;
            case ParamType::LogReal:
                u = (std::log(v) - std::log(d.lower)) / (std::log(d.upper) - std::log(d.lower));
                break;
            case ParamType::Integer: u = (v - d.lower + 0.5) / (d.upper - d.lower + 1.0); break;
        }
        unit.push_back(std::clamp(u, 0.0, 1.0));
    }
    return unit;
}

HyperparamAssignment sample_assignment(const HyperparamSpace& space, Rng& rng) {
    std::vector<double> unit(space.size());
    for (auto& u : unit) u = rng.uniform();
    return decode(space, unit);
}

std::string to_string(ParamType t) {
    switch (t) {
        case ParamType::Integer: return "integer";
        case ParamType::Real: return "real";
        case ParamType::LogReal: return "log-real";
    }
    return "?";
}

ParamType parse_param_type(const std::string& s) {
    if (s == "integer") return ParamType::Integer;
    if (s == "real") return ParamType::Real;
    if (s == "log-real") return ParamType::LogReal;
    throw ValidationError("unknown parameter type '" + s + "'");
}

nlohmann::json to_json(const HyperparamSpace& space) {
    auto arr = nlohmann::json::array();
    for (const auto& d : space.dims) {
        arr.push_back({{"name", d.name}, {"type", to_string(d.type)}, {"lower", d.lower}, {"upper", d.upper}});
    }
    return arr;
}

HyperparamSpace space_from_json(const nlohmann::json& j) {
    HyperparamSpace space;
    try {
        for (const auto& item : j) {
            space.dims.push_back({item.at("name").get<std::string>(),
                                  parse_param_type(item.at("type").get<std::string>()),
                                  item.at("lower").get<double>(), item.at("upper").get<double>()});
        }
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("hyperparameter space: ") + e.what());
    }
    space.validate();
    return space;
}

nlohmann::json to_json(const HyperparamAssignment& h) {
    auto obj = nlohmann::json::object();
    for (const auto& [name, value] : h) obj[name] = value;
    return obj;
}

std::string assignment_key(const HyperparamAssignment& h) {
    std::string key;
    char buf[64];
    for (const auto& [name, value] : h) {
        key += name;
        key.push_back('=');
        const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
        key.append(buf, ptr);
        key.push_back(';');
    }
    return key;
}

}  // namespace dradapt
