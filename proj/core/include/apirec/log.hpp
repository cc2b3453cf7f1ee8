// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <functional>
#include <string>
#include <string_view>

namespace apirec {

/// Receives library warnings. The default sink writes `warning: <msg>` to stderr.
using WarningSink = std::function<void(std::string_view)>;

/// Installs `sink` (empty restores the default) and returns the previous one.
WarningSink set_warning_sink(WarningSink sink);

void warn(std::string_view message);

}  // namespace apirec
