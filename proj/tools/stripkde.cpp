#include "stripkde/cli.hpp"

#include <iostream>

int
main(int argc, char** argv)
{
  return stripkde::run_cli(argc, argv, std::cout, std::cerr);
}
