#include "tga/cli.hpp"

int main(int argc, char** argv) { return tga::run_cli(argc, argv); }
