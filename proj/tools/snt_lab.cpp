#include <iostream>
#include <string>
#include <vector>

#include "sntlab/app/cli.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    try {
        return sntlab::app::run_cli(args, std::cout, std::cerr);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return sntlab::app::kExitIo;
    }
}
