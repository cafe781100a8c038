#pragma once

#include "patternforge/core.hpp"

#include <iosfwd>
#include <string>
#include <vector>

namespace patternforge {

/// Text interchange format shared by all CLI commands.
///
///   # k_grid=<int> t_grid=<seconds>
///   10,20,30
///   5,12,40
///
/// One pattern per line as comma-separated ascending 1-based grid indices;
/// an empty line is a pattern with no points (a legal, incorrect pattern).
struct PatternFile {
    grid_index k_grid = 0;
    double t_grid = 0.0;
    std::vector<Pattern> patterns;
};

void write_patterns(std::ostream &out, const PatternFile &file);
PatternFile read_patterns(std::istream &in);

void write_patterns_file(const std::string &path, const PatternFile &file);
PatternFile read_patterns_file(const std::string &path);

} // namespace patternforge
