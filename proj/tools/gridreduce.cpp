#include "commands.hpp"

int main(int argc, char** argv) { return gridreduce::cli::run_cli(argc, argv); }
