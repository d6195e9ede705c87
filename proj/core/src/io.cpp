#include "dwrlab/io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "dwrlab/errors.hpp"

namespace dwrlab {

std::string format_real(double value) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", value);
    return buf;
}

std::string read_text_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw Error("cannot open file: " + path.string());
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

void write_text_file(const std::filesystem::path& path, const std::string& content) {
    if (path.has_parent_path())
        std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw Error("cannot write file: " + path.string());
    out << content;
}

} // namespace dwrlab
