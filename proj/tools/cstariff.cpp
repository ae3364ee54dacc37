#include "cstariff/cli.hpp"

int main(int argc, char** argv) { return cstariff::cli::run_cli(argc, argv); }
