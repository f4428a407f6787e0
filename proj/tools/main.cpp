#include "tckae/cli.hpp"

int main(int argc, char** argv) { return tckae::cli::cli_main(argc, argv); }
