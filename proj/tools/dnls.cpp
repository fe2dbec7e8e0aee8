#include <dnls/cli.hpp>

int main(int argc, char** argv) { return dnls::run_command(argc, argv); }
