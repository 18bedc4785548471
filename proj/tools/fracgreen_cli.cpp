#include "fracgreen/cli.hpp"

int main(int argc, char** argv) { return fracgreen::cli::main_entry(argc, argv); }
