#include <iostream>

#include "eegalign/cli/run.hpp"

int main(int argc, char** argv)
{
    return eegalign::cli::run_main(argc, argv, std::cout, std::cerr);
}
