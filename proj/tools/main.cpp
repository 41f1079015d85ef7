#include "bayeswarp/cli.hpp"

int main(int argc, char** argv) { return bayeswarp::cli_main(argc, argv); }
