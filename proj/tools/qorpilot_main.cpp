#include "qorpilot/cli/cli.hpp"

int main(int argc, char** argv) { return qorpilot::cli::run_cli(argc, argv); }
