#include <xtproc/cli.hpp>

#include <iostream>

int main(int argc, char** argv)
{
    return xtproc::cli::main_entry(std::vector<std::string>(argv, argv + argc), std::cout, std::cerr);
}
