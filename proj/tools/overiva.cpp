#include <iostream>

#include "overiva/app.hpp"

int main(int argc, char** argv) { return overiva::run_cli(argc, argv, std::cout, std::cerr); }
