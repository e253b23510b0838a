#include "cavity/cli.hpp"

int main(int argc, char** argv) { return cavity::cli::run(argc, argv); }
