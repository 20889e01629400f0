#include "pfol/cli.hpp"

int main(int argc, char** argv) { return pfol::cli_main(argc, argv); }
