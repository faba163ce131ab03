#include "mmalign/cli.hpp"

int main(int argc, char** argv) { return mmalign::cli_main(argc, argv); }
