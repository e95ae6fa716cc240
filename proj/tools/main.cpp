#include "spdekit/cli.hpp"

int main(int argc, char** argv) { return spdekit::cli_dispatch(argc, argv); }
