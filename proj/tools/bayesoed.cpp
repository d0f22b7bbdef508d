#include "bayesoed/cli.hpp"

int main(int argc, char** argv) { return bayesoed::cli::run_cli(argc, argv); }
