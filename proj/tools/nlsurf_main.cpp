#include <exception>
#include <iostream>

#include "nlsurf/experiment.hpp"

int main(int argc, char** argv) {
  try {
    return nlsurf::cli::run(argc, argv);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 4;
  }
}
