#include "shadowban/cli.hpp"

int main(int argc, char** argv) { return shadowban::run_cli(argc, argv); }
