#include "evstar/cli.hpp"

int main(int argc, char** argv) { return evstar::cli::run(argc, argv); }
