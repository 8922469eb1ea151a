#include "bdbc/cli.hpp"

int main(int argc, char** argv) { return bdbc::cli_main(argc, argv); }
