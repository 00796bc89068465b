#include "spiralnet/error.hpp"

namespace spiralnet {

ParseError::ParseError(const std::string& source, std::size_t line,
                       const std::string& what)
    : IoError(source + ":" + std::to_string(line) + ": " + what) {}

}  // namespace spiralnet
