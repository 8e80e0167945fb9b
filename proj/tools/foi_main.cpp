#include "foi/cli.hpp"

int main(int argc, char** argv) { return foi::cli::run(argc, argv); }
