#include <iostream>

#include "harmrec/cli.hpp"

int main(int argc, char** argv) { return harmrec::cli::run(argc, argv, std::cout, std::cerr); }
