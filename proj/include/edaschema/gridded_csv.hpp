#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "edaschema/errors.hpp"
#include "edaschema/geometry.hpp"
#include "edaschema/text.hpp"

namespace eda {

struct GridSample {
    double x_um = 0.0;
    double y_um = 0.0;
    double value = 0.0;

    friend bool operator==(const GridSample&, const GridSample&) = default;
};

// Point samples from PDN analysis output (IR-drop in mV, EM current
// density); units ride along opaquely from the header.
struct GridSamples {
    std::vector<GridSample> samples;
    std::string value_unit;  // third header token past "value", if any

    BoxUm bounding_box() const {
        BoxUm box;
        if (samples.empty()) return box;
        box = {samples[0].x_um, samples[0].y_um, samples[0].x_um, samples[0].y_um};
        for (const auto& s : samples) box.expand(s.x_um, s.y_um);
        return box;
    }

    friend bool operator==(const GridSamples&, const GridSamples&) = default;
};

namespace csv_detail {

inline std::vector<std::string_view> split_csv(std::string_view line) {
    std::vector<std::string_view> out;
    size_t b = 0;
    while (true) {
        size_t e = line.find(',', b);
        if (e == std::string_view::npos) {
            out.push_back(text::trim(line.substr(b)));
            return out;
        }
        out.push_back(text::trim(line.substr(b, e - b)));
        b = e + 1;
    }
}

}  // namespace csv_detail

// Rows of "x,y,value" with a header row. Sample order follows the file.
// When `die_box_um` is given, out-of-die coordinates are an error.
inline GridSamples parse_gridded_csv(std::string_view csv_text,
                                     const BoxUm* die_box_um = nullptr) {
    GridSamples out;
    text::LineReader lr(csv_text);
    std::string_view raw;
    if (!lr.next(raw)) throw ParseError("empty CSV document");
    auto header = csv_detail::split_csv(text::trim(raw));
    if (header.size() < 3 || header[0] != "x" || header[1] != "y" ||
        !text::starts_with(header[2], "value"))
        throw ParseError("expected header 'x,y,value'", lr.line_no());
    // unit in brackets: value[mV]
    auto lb = header[2].find('[');
    if (lb != std::string_view::npos) {
        auto rb = header[2].find(']', lb);
        if (rb != std::string_view::npos)
            out.value_unit = std::string(header[2].substr(lb + 1, rb - lb - 1));
    }

    while (lr.next(raw)) {
        std::string_view line = text::trim(raw);
        if (line.empty()) continue;
        auto cells = csv_detail::split_csv(line);
        if (cells.size() != header.size())
            throw ParseError("inconsistent column count", lr.line_no());
        GridSample s;
        s.x_um = text::to_double(cells[0], lr.line_no());
        s.y_um = text::to_double(cells[1], lr.line_no());
        s.value = text::to_double(cells[2], lr.line_no());
        if (!std::isfinite(s.x_um) || !std::isfinite(s.y_um) || !std::isfinite(s.value))
            throw ParseError("non-finite sample", lr.line_no());
        if (die_box_um) {
            if (s.x_um < die_box_um->x_min || s.x_um > die_box_um->x_max ||
                s.y_um < die_box_um->y_min || s.y_um > die_box_um->y_max)
                throw ParseError("sample outside the die box", lr.line_no());
        }
        out.samples.push_back(s);
    }
    return out;
}

}  // namespace eda
