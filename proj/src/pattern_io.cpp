#include "patternforge/pattern_io.hpp"

#include "patternforge/units.hpp"

#include <charconv>
#include <fstream>
#include <ostream>
#include <sstream>

namespace patternforge {

namespace {

grid_index parse_index(std::string_view token, std::size_t line_no) {
    grid_index value = 0;
    const char *first = token.data();
    const char *last = token.data() + token.size();
    auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc() || ptr != last)
        fail(errc::malformed_file,
             "line " + std::to_string(line_no) + ": bad grid index '" +
                 std::string(token) + "'");
    return value;
}

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t' ||
                          s.front() == '\r'))
        s.remove_prefix(1);
    while (!s.empty() &&
           (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
        s.remove_suffix(1);
    return s;
}

} // namespace

void write_patterns(std::ostream &out, const PatternFile &file) {
    out << "# k_grid=" << file.k_grid
        << " t_grid=" << format_double(file.t_grid) << "\n";
    for (const Pattern &p : file.patterns) {
        const auto ix = p.indices();
        for (std::size_t i = 0; i < ix.size(); ++i) {
            if (i)
                out << ',';
            out << ix[i];
        }
        out << "\n";
    }
}

PatternFile read_patterns(std::istream &in) {
    PatternFile file;
    std::string line;
    if (!std::getline(in, line))
        fail(errc::malformed_file, "empty pattern file");

    // Header: "# k_grid=<int> t_grid=<double>"
    {
        std::istringstream hs(line);
        std::string hash, kg, tg;
        hs >> hash >> kg >> tg;
        if (hash != "#" || kg.rfind("k_grid=", 0) != 0 ||
            tg.rfind("t_grid=", 0) != 0)
            fail(errc::malformed_file,
                 "missing '# k_grid=... t_grid=...' header");
        file.k_grid = parse_index(std::string_view(kg).substr(7), 1);
        auto t = parse_duration(std::string_view(tg).substr(7));
        if (!t || !(*t > 0.0))
            fail(errc::malformed_file, "bad t_grid in header");
        file.t_grid = *t;
    }

    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        std::string_view body = trim(line);
        std::vector<grid_index> indices;
        while (!body.empty()) {
            const auto comma = body.find(',');
            const std::string_view token = trim(body.substr(0, comma));
            if (token.empty())
                fail(errc::malformed_file,
                     "line " + std::to_string(line_no) + ": empty index");
            indices.push_back(parse_index(token, line_no));
            if (comma == std::string_view::npos)
                break;
            body.remove_prefix(comma + 1);
        }
        try {
            file.patterns.push_back(
                Pattern::from_indices(std::move(indices), file.k_grid,
                                      file.t_grid));
        } catch (const error &e) {
            if (e.code() != errc::invalid_pattern)
                throw;
            fail(errc::malformed_file,
                 "line " + std::to_string(line_no) + ": " + e.what());
        }
    }
    return file;
}

void write_patterns_file(const std::string &path, const PatternFile &file) {
    std::ofstream out(path, std::ios::binary);
    if (!out)
        fail(errc::io_error, "cannot open '" + path + "' for writing");
    write_patterns(out, file);
    if (!out)
        fail(errc::io_error, "write to '" + path + "' failed");
}

PatternFile read_patterns_file(const std::string &path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        fail(errc::io_error, "cannot open '" + path + "'");
    return read_patterns(in);
}

} // namespace patternforge
