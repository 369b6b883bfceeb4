#include <iostream>

#include "facetview/cli.hpp"

int main(int argc, char** argv)
{
    return facetview::run_cli(std::vector<std::string>(argv + 1, argv + argc), std::cout, std::cerr);
}
