#pragma once

#include <exception>

namespace lazyb {

/// Process exit status for an error escaping a CLI command: 1 for bad input,
/// 2 for anything else (broken invariants, unexpected failures).
int exit_code_of(const std::exception& e);

}  // namespace lazyb
