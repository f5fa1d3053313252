#include "tbprop_cli.hpp"

int main(int argc, char** argv) { return tbprop::cli::run(argc, argv); }
