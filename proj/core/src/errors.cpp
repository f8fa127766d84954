#include "nicmap/errors.hpp"

namespace nicmap {

SchemaError::SchemaError(const std::string& path, const std::string& what)
    : Error(path.empty() ? what : path + ": " + what), path_(path) {}

}  // namespace nicmap
