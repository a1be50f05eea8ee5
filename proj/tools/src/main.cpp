// SPDX-License-Identifier: Apache-2.0
#include "gennav/cli/app.hpp"

#include <iostream>

int main(int argc, char** argv)
{
    return gennav::cli::dispatch(argc, argv, std::cout, std::cerr);
}
