#include "cli.hpp"

int main(int argc, char** argv) { return scatter::cli::run(argc, argv); }
