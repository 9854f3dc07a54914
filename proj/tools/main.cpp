#include "cli.hpp"

int main(int argc, char** argv) { return tvcount::cli::run_cli(argc, argv); }
