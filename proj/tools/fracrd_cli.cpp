#include "fracrd/harness.hpp"

int main(int argc, char** argv) { return fracrd::run_cli(argc, argv); }
