#include "jolimas/cli.hpp"

int main(int argc, char** argv) { return jolimas::dispatch(argc, argv); }
