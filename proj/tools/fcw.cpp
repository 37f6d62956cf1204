#include <string>
#include <vector>

#include "fcw/cli.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return fcw::cli::run_cli(std::move(args));
}
