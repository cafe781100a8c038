#pragma once

#include "patternforge/core.hpp"

#include <json.hpp>

namespace patternforge {

/// Config echo: plain numbers in base units (seconds, hertz), absent bounds
/// as null.
nlohmann::json config_to_json(const SamplingConfig &cfg);

/// Accepts each field either as a number in base units or as a
/// unit-suffixed string ("1ms", "100kHz"), normalized on load. tau, t_grid
/// and f_req are required; t_min, t_max and sigma2 are optional.
SamplingConfig config_from_json(const nlohmann::json &j);

nlohmann::json derived_to_json(const DerivedParams &d);

} // namespace patternforge
