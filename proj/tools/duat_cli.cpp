#include "duat/cli.hpp"

int main(int argc, char** argv) { return duat::cli::run(argc, argv); }
