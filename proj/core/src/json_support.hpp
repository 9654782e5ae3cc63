#pragma once

#include <filesystem>
#include <string>

#include "muacp/types.hpp"

namespace muacp::json_support {

/// Whole file as a string; throws Error when unreadable.
std::string read_file(const std::filesystem::path& path);

}  // namespace muacp::json_support
