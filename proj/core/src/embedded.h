#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace calciner::detail {

/// Contents of a data file compiled into the library, empty if absent.
std::string_view embedded_file(std::string_view name);
std::vector<std::string> embedded_file_names();

} // namespace calciner::detail
