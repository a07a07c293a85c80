#include "lindley/cli.hpp"

int main(int argc, char** argv) { return lindley::cli::run(argc, argv); }
