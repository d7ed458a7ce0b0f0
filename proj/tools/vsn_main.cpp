#include "vsn/cli.hpp"

int main(int argc, char** argv) { return vsn::run_cli(argc, argv); }
