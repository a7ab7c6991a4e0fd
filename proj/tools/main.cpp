#include <iostream>

#include "sketchattn/cli.hpp"

int main(int argc, char** argv) {
  return sketchattn::cli_main(argc, argv, std::cout, std::cerr);
}
