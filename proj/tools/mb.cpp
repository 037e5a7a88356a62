#include "mb/cli.hpp"
#include "mb/parallel.hpp"

#include <iostream>
#include <string>
#include <vector>

int main(int argc, char** argv) {
    mb::configure_workers_from_env();
    std::vector<std::string> args(argv + 1, argv + argc);
    return mb::cli::run_cli(args, std::cout, std::cerr);
}
