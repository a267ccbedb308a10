#include <string>
#include <vector>

#include "hjlab/cli.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return hjlab::run_cli(args);
}
