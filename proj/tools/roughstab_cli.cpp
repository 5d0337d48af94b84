#include "roughstab/cli.hpp"

int main(int argc, char** argv) { return roughstab::cli::run(argc, argv); }
