#include "ebnp/cli.hpp"

int main(int argc, char** argv) { return ebnp::dispatch(argc, argv); }
