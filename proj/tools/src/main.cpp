#include "ccw/cli/commands.hpp"

int main(int argc, char** argv) { return ccw::cli::run(argc, argv); }
