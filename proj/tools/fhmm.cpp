#include "cli.hpp"

int main(int argc, char** argv) { return fhmm::cli::run(argc, argv); }
