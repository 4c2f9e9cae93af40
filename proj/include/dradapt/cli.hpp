#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace dradapt {

/// Entry point of the `dradapt` tool. args excludes the program name.
/// Returns 0 on success, 1 on usage or validation errors, 2 on runtime errors.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace dradapt
