#include "depbound/cli.hpp"

int main(int argc, char** argv) { return depbound::run_cli(argc, argv); }
