#pragma once

#include <iosfwd>

namespace hwiloc {

/// `hwiloc <bounds|estimate|validate|show-config> [--config path] [--seed u64]
/// [--out path] [--sweep axis[=v1,v2,...]] [--format csv]`.
/// Returns 0 on success, 1 on a usage or config error, 2 on a numeric failure.
int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace hwiloc
