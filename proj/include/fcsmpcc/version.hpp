#pragma once

namespace fcsmpcc {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace fcsmpcc
