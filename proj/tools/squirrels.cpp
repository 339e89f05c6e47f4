#include "squirrels/cli.hpp"

int main(int argc, char** argv) { return squirrels::cli_main(argc, argv); }
