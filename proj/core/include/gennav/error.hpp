// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>

namespace gennav {

/// Runtime failure inside the library (exit code 1 at the CLI boundary).
class Error : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

/// Bad caller input: malformed files, invalid configuration, missing paths (exit code 2).
class InputError : public Error
{
public:
    using Error::Error;
};

} // namespace gennav
