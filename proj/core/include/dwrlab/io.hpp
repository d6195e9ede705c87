#pragma once

#include <filesystem>
#include <string>

namespace dwrlab {

/// 17 significant digits: lossless round trip for 64-bit doubles, no locale.
std::string format_real(double value);

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, const std::string& content);

} // namespace dwrlab
