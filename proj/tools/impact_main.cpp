#include <iostream>

#include "impact/pipeline/run.hpp"

int main(int argc, char** argv) { return impact::pipeline::run_cli(argc, argv, std::cout, std::cerr); }
