#include "cli/commands.hpp"

int main(int argc, char** argv) { return bandana::cli::run(argc, argv); }
