#include "msle/cli.hpp"

int main(int argc, char** argv) { return msle::cli::run(argc, argv); }
