#pragma once

#include <ostream>

namespace bdbc {

/// Command-line driver. Returns 0 on success, 1 on a usage or input error and
/// 2 on a numerical failure. JSON goes to `out` unless an output file is
/// given; diagnostics go to `err`.
int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err);
int cli_main(int argc, const char* const* argv);

} // namespace bdbc
