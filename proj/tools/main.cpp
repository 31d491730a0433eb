#include "pmono/commands.hpp"

#include <iostream>

int main(int argc, char** argv) {
    return pmono::run_cli(argc, argv, std::cout, std::cerr);
}
