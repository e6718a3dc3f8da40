#pragma once

#include <string_view>

namespace c2ft {

// `git describe --always --dirty` of the source tree at configure time.
std::string_view git_describe();

}  // namespace c2ft
