#include "cli.hpp"

int main(int argc, char** argv) { return pcfgeo::cli::run(argc, argv); }
