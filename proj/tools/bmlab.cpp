#include <bmlab/cli.hpp>

int main(int argc, char** argv) { return bmlab::cli::main(argc, argv); }
