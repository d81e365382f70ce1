#include <iostream>

#include "dpre/cli.hpp"

int main(int argc, char** argv)
{
    return dpre::cli::dispatch(argc, argv, std::cout, std::cerr);
}
