#include "commands.hpp"

int main(int argc, char** argv) { return ehs::cli::run_cli(argc, argv); }
