#include "lazyb/exit_code.hpp"

#include "lazyb/types.hpp"

namespace lazyb {

int exit_code_of(const std::exception& e) {
  return dynamic_cast<const ValidationError*>(&e) != nullptr ? 1 : 2;
}

}  // namespace lazyb
