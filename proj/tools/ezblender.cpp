#include "ezb/app/cli.hpp"

#include <iostream>

int main(int argc, char** argv) {
    return ezb::app::cli_main(std::vector<std::string>(argv, argv + argc), std::cout, std::cerr);
}
