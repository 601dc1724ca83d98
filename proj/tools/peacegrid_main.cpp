#include "peacegrid/cli.hpp"

int main(int argc, char** argv) { return peacegrid::run_cli(argc, argv); }
