#pragma once

namespace prox {
inline constexpr const char* kLibraryVersion = "0.1.0";
}
