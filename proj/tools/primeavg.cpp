#include "primeavg/cli.hpp"

int main(int argc, char** argv) { return primeavg::cli::main(argc, argv); }
