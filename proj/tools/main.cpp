#include "cli/commands.hpp"

int main(int argc, char** argv) { return vcsem::cli::run(argc, argv); }
