#include "qista/cli.hpp"

int main(int argc, char** argv) { return qista::cli::dispatch(argc, argv); }
