#include "gechan/cli.hpp"

int main(int argc, char** argv) { return gechan::cli::run(argc, argv); }
