#include "pwdamp/cli.hpp"

int main(int argc, char** argv) { return pwdamp::cli::main_entry(argc, argv); }
