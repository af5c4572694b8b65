#include <iostream>

#include "cli.hpp"

int main(int argc, char** argv) {
    return goalrl::cli_dispatch(argc, argv, std::cout, std::cerr);
}
