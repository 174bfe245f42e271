#include "farm/errors.hpp"

namespace farm {

IngestError::IngestError(std::size_t index, const std::string& what)
    : Error("hour " + std::to_string(index) + ": " + what), index_(index) {}

}  // namespace farm
