#include "ibge/cli.hpp"

int main(int argc, char** argv) { return ibge::cli::run(argc, argv); }
