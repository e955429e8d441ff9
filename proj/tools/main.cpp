#include "iarpm/cli.hpp"

int main(int argc, char** argv) { return iarpm::run_cli(argc, argv); }
