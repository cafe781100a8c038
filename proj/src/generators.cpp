#include "patternforge/generators.hpp"

#include <cctype>
#include <string>

namespace patternforge {

std::string_view generator_name(GeneratorKind k) {
    switch (k) {
    case GeneratorKind::js:
        return "js";
    case GeneratorKind::ars:
        return "ars";
    case GeneratorKind::angie:
        return "angie";
    }
    return "?";
}

std::optional<GeneratorKind> parse_generator(std::string_view name) {
    std::string lower(name);
    for (char &c : lower)
        c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    if (lower == "js")
        return GeneratorKind::js;
    if (lower == "ars")
        return GeneratorKind::ars;
    if (lower == "angie")
        return GeneratorKind::angie;
    return std::nullopt;
}

Pattern generate_at(GeneratorKind kind, const DerivedParams &d, double sigma2,
                    std::uint64_t seed, std::uint64_t ordinal) {
    RandomSource rng(seed, ordinal);
    return generate_one(kind, d, sigma2, rng);
}

PatternBag generate_bag(GeneratorKind kind, const SamplingConfig &cfg,
                        std::uint64_t n, std::uint64_t seed) {
    PatternBag bag;
    bag.config = cfg;
    bag.derived = kind == GeneratorKind::angie
                      ? derive_params(cfg)
                      : derive_params_unchecked_room(cfg);
    bag.kind = kind;
    bag.seed = seed;
    bag.patterns.reserve(n);
    bag.verdicts.reserve(n);
    for (std::uint64_t i = 0; i < n; ++i) {
        Pattern p = generate_at(kind, bag.derived, cfg.sigma2, seed, i);
        bag.verdicts.push_back(validate_pattern(p, bag.derived));
        bag.patterns.push_back(std::move(p));
    }
    return bag;
}

} // namespace patternforge
