#include "ringml/cli.hpp"

int main(int argc, char** argv) { return ringml::cli_run(argc, argv); }
