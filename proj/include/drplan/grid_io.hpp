#pragma once

// JSON grid serialization:
//   {"width": int, "height": int, "oob_fill": 0|1, "cells": [0|1, ...]}
// row-major, integers only.

#include <fstream>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "drplan/grid.hpp"

namespace drplan {

/// Filesystem-level failure (open/read/write).
struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

inline ChipArray array_from_json(const nlohmann::json& j, const std::string& where) {
    if (!j.is_object()) throw std::invalid_argument(where + ": expected a JSON object");
    for (const char* key : {"width", "height", "oob_fill", "cells"})
        if (!j.contains(key))
            throw std::invalid_argument(where + ": missing field '" + key + "'");
    if (!j["width"].is_number_integer() || !j["height"].is_number_integer())
        throw std::invalid_argument(where + ": width/height must be integers");
    const long long w = j["width"].get<long long>();
    const long long h = j["height"].get<long long>();
    if (w < 1 || h < 1)
        throw std::invalid_argument(where + ": dimensions must be positive, got " +
                                    std::to_string(w) + "x" + std::to_string(h));
    const long long oob = j["oob_fill"].is_number_integer() ? j["oob_fill"].get<long long>() : -1;
    if (oob != 0 && oob != 1)
        throw std::invalid_argument(where + ": oob_fill must be 0 or 1");
    const auto& cells = j["cells"];
    if (!cells.is_array())
        throw std::invalid_argument(where + ": cells must be an array");
    if (static_cast<long long>(cells.size()) != w * h)
        throw std::invalid_argument(where + ": dimension mismatch, cells has " +
                                    std::to_string(cells.size()) + " entries, expected " +
                                    std::to_string(w * h));
    ChipArray a(static_cast<int>(h), static_cast<int>(w), static_cast<std::uint8_t>(oob), 0);
    for (std::size_t i = 0; i < cells.size(); ++i) {
        if (!cells[i].is_number_integer())
            throw std::invalid_argument(where + ": non-binary cell at index " + std::to_string(i));
        const long long v = cells[i].get<long long>();
        if (v != 0 && v != 1)
            throw std::invalid_argument(where + ": non-binary cell value " + std::to_string(v) +
                                        " at index " + std::to_string(i));
        a.cells[i] = static_cast<std::uint8_t>(v);
    }
    return a;
}

inline nlohmann::json array_to_json(const ChipArray& a) {
    nlohmann::json j;
    j["width"] = a.width;
    j["height"] = a.height;
    j["oob_fill"] = static_cast<int>(a.oob_fill);
    std::vector<int> cells(a.cells.begin(), a.cells.end());
    j["cells"] = cells;
    return j;
}

inline ChipArray read_array(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("read_array: cannot open " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw std::invalid_argument(path + ": malformed JSON (" + e.what() + ")");
    }
    return array_from_json(j, path);
}

inline void write_array(const ChipArray& a, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("write_array: cannot open " + path);
    out << array_to_json(a).dump() << '\n';
    if (!out) throw IoError("write_array: write failed for " + path);
}

}  // namespace drplan
