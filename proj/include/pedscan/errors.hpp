#pragma once

#include <stdexcept>
#include <string>

namespace pedscan {

/// Malformed or unreadable input data (annotations, manifests, images, model files).
class FormatError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A model file written by an incompatible format version.
class ModelVersionError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace pedscan
