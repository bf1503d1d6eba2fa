#include "gllab/cli.hpp"

int main(int argc, char** argv) { return gllab::cli::run(argc, argv); }
