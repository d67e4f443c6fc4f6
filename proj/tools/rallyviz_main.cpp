#include "rallyviz/cli.h"

int main(int argc, char** argv) { return rallyviz::run_cli(argc, argv); }
