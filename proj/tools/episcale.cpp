#include "episcale/cli.hpp"

#include <iostream>

int main(int argc, char** argv)
{
    return episcale::run_cli(argc, argv, std::cout, std::cerr);
}
