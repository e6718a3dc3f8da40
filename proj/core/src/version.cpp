#include "c2ft/version.hpp"

namespace c2ft {

std::string_view git_describe() { return C2FT_GIT_DESCRIBE; }

}  // namespace c2ft
