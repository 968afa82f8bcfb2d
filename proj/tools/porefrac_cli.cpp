#include "porefrac/scenario.hpp"

int main(int argc, char** argv) { return porefrac::run_cli(argc, argv); }
