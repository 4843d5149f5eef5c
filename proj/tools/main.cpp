#include "hwiener/harness/cli.hpp"

int main(int argc, char** argv) { return hwiener::harness::run_cli(argc, argv); }
