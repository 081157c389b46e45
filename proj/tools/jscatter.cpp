#include <iostream>
#include <string>
#include <vector>

#include "jacobi_scatter/cli.hpp"

int main(int argc, char** argv)
{
    return jacobi_scatter::cli::run(std::vector<std::string>(argv + 1, argv + argc), std::cout, std::cerr);
}
