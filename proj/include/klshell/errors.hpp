/** @file errors.hpp

    @brief Exception types shared by all klshell modules.
*/
#pragma once

#include <stdexcept>
#include <string>

namespace klshell {

/// Base class of every error raised by the library.
class Error : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

class InvalidArgument : public Error
{
public:
    using Error::Error;
};

class Unsupported : public Error
{
public:
    using Error::Error;
};

/// Tangent plane degenerates (A1 x A2 = 0) at the requested point.
class SingularGeometry : public Error
{
public:
    using Error::Error;
};

/// Problem data is inconsistent (e.g. multipliers needed but missing).
class InvalidSetup : public Error
{
public:
    using Error::Error;
};

/// Factorization hit a structurally or numerically zero pivot.
class SingularSystem : public Error
{
public:
    using Error::Error;
};

} // namespace klshell
