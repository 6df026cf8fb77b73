#include "toposdf/cli.hpp"

int main(int argc, char** argv) { return toposdf::cli_main(argc, argv); }
