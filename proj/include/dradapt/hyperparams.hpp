#pragma once

#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "dradapt/rng.hpp"

namespace dradapt {

enum class ParamType { Integer, Real, LogReal };

struct ParamDimension {
    std::string name;
    ParamType type = ParamType::Real;
    double lower = 0.0;
    double upper = 1.0;
};

/// Ordered list of search dimensions. Invariants (checked by validate()):
/// lower < upper, integral bounds for integer dims, positive bounds for log dims.
struct HyperparamSpace {
    std::vector<ParamDimension> dims;

    bool empty() const noexcept { return dims.empty(); }
    std::size_t size() const noexcept { return dims.size(); }
    void validate() const;
};

/// name -> value; integer dimensions hold integral doubles.
using HyperparamAssignment = std::map<std::string, double>;

/// Throws ValidationError unless every dimension is assigned within bounds
/// and no unknown names are present.
void validate_assignment(const HyperparamSpace& space, const HyperparamAssignment& h);

/// Maps a point of the unit cube onto the space: linear for real dims,
/// log-linear for log-real dims, equal-width bins for integer dims.
HyperparamAssignment decode(const HyperparamSpace& space, const std::vector<double>& unit);

/// Inverse of decode (integers land on their bin centers).
std::vector<double> encode(const HyperparamSpace& space, const HyperparamAssignment& h);

/// Uniform in the unit cube, i.e. log-uniform on log-real dims.
HyperparamAssignment sample_assignment(const HyperparamSpace& space, Rng& rng);

std::string to_string(ParamType t);
ParamType parse_param_type(const std::string& s);

nlohmann::json to_json(const HyperparamSpace& space);
HyperparamSpace space_from_json(const nlohmann::json& j);
nlohmann::json to_json(const HyperparamAssignment& h);

/// Canonical textual key used for caching evaluated assignments.
std::string assignment_key(const HyperparamAssignment& h);

}  // namespace dradapt
