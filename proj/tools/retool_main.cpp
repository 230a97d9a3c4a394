#include "retool/cli.hpp"

int main(int argc, char** argv) { return retool::cli::run(argc, argv); }
