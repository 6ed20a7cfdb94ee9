#include "glr/cli.hpp"

int main(int argc, char** argv) { return glr::cli_main(argc, argv); }
