#include "larrr/cli.hpp"

int main(int argc, char** argv) { return larrr::cli::run(argc, argv); }
