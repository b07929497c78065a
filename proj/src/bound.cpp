#include "projconst/bound.hpp"

namespace projconst {

std::string_view to_string(ProgramMode mode) noexcept {
    return mode == ProgramMode::Symmetric ? "symmetric" : "general";
}

}  // namespace projconst
