#include <harmeas/cli.hpp>

int main(int argc, char** argv) { return harmeas::run_cli(argc, argv); }
