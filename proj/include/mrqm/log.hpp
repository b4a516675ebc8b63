#pragma once

#include <functional>
#include <string_view>

namespace mrqm {

using WarningSink = std::function<void(std::string_view)>;

/// Replaces the warning sink (default: one line on stderr). An empty
/// function silences warnings. Returns the previous sink.
WarningSink set_warning_sink(WarningSink sink);

void warn(std::string_view message);

} // namespace mrqm
