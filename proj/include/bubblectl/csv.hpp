/** \file csv.hpp
 *  CSV output helpers. Doubles are printed with %.17g so equal values always
 *  serialize to equal bytes.
 */
#pragma once

#include <cstdio>
#include <ostream>
#include <string>

namespace bubblectl::csv {

inline std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline void schema_comment(std::ostream& os, const std::string& name, int version = 1) {
    os << "# schema: bubblectl." << name << " v" << version << "\n";
}

}  // namespace bubblectl::csv
