#include <iostream>

#include "topicmine/cli.hpp"

int main(int argc, char** argv) { return topicmine::cli::run(argc, argv, std::cout, std::cerr); }
