#include <iostream>

#include "mw/cli.hpp"

int main(int argc, char** argv) {
  return mw::cli::run({argv + 1, argv + argc}, std::cin, std::cout, std::cerr);
}
