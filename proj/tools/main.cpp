#include "cli_main.hpp"

int main(int argc, char** argv) { return sirf::cli_main(argc, argv); }
