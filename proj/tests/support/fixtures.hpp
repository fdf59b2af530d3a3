#pragma once

#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>

#include "hfsim/netmodel.hpp"

namespace fixtures {

inline std::string case_path(const std::string& name) {
    return std::string(HFSIM_CASES_DIR) + "/" + name;
}

inline std::string slurp(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline hfsim::GridCase load_case(const std::string& name) {
    return hfsim::parse_case(slurp(case_path(name)));
}

}  // namespace fixtures
