#include "negcurv/cli.hpp"

int main(int argc, char** argv) { return negcurv::cli::run(argc, argv); }
