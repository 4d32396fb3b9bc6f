#include "stark/cli/app.hpp"

int main(int argc, char** argv) { return stark::cli::run(argc, argv); }
