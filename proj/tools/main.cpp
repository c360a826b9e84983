#include "commands.hpp"

int main(int argc, char** argv) { return naqs::cli::run_cli_main(argc, argv); }
