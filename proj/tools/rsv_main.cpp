#include <iostream>
#include <string>
#include <vector>

#include "rsv/cli.h"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv, argv + argc);
    return rsv::cli::run(args, std::cout, std::cerr);
}
