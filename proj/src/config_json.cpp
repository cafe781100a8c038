#include "patternforge/config_json.hpp"

#include "patternforge/units.hpp"

namespace patternforge {

namespace {

nlohmann::json opt_to_json(const std::optional<double> &v) {
    return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
}

double number_or_unit(const nlohmann::json &v, const char *field,
                      bool frequency) {
    if (v.is_number())
        return v.get<double>();
    if (v.is_string()) {
        const auto &s = v.get_ref<const std::string &>();
        const auto parsed =
            frequency ? parse_frequency(s) : parse_duration(s);
        if (!parsed)
            fail(errc::invalid_config,
                 std::string("cannot parse \"") + s + "\" for " + field);
        return *parsed;
    }
    fail(errc::invalid_config,
         std::string(field) + " must be a number or a unit string");
}

} // namespace

nlohmann::json config_to_json(const SamplingConfig &cfg) {
    nlohmann::json j;
    j["tau"] = cfg.tau;
    j["t_grid"] = cfg.t_grid;
    j["f_req"] = cfg.f_req;
    j["t_min"] = opt_to_json(cfg.t_min);
    j["t_max"] = opt_to_json(cfg.t_max);
    j["sigma2"] = cfg.sigma2;
    return j;
}

SamplingConfig config_from_json(const nlohmann::json &j) {
    if (!j.is_object())
        fail(errc::invalid_config, "config must be a JSON object");
    SamplingConfig cfg;
    bool have_tau = false, have_grid = false, have_freq = false;
    for (const auto &[key, value] : j.items()) {
        if (key == "tau") {
            cfg.tau = number_or_unit(value, "tau", false);
            have_tau = true;
        } else if (key == "t_grid") {
            cfg.t_grid = number_or_unit(value, "t_grid", false);
            have_grid = true;
        } else if (key == "f_req") {
            cfg.f_req = number_or_unit(value, "f_req", true);
            have_freq = true;
        } else if (key == "t_min") {
            if (!value.is_null())
                cfg.t_min = number_or_unit(value, "t_min", false);
        } else if (key == "t_max") {
            if (!value.is_null())
                cfg.t_max = number_or_unit(value, "t_max", false);
        } else if (key == "sigma2") {
            if (!value.is_number())
                fail(errc::invalid_config, "sigma2 must be a number");
            cfg.sigma2 = value.get<double>();
        } else {
            fail(errc::invalid_config, "unknown config field: " + key);
        }
    }
    if (!have_tau || !have_grid || !have_freq)
        fail(errc::invalid_config, "config needs tau, t_grid and f_req");
    return cfg;
}

nlohmann::json derived_to_json(const DerivedParams &d) {
    nlohmann::json j;
    j["k_grid"] = d.k_grid;
    j["tau_hat"] = d.tau_hat;
    j["k_req"] = d.k_req;
    j["f_hat"] = d.f_hat;
    j["t_hat"] = d.t_hat;
    j["n_avg"] = d.n_avg;
    j["k_min"] = d.k_min;
    j["k_max"] = d.bounded_max() ? nlohmann::json(d.k_max)
                                 : nlohmann::json(nullptr);
    j["t_grid"] = d.t_grid;
    return j;
}

} // namespace patternforge
