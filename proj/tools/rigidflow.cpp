#include "rigidflow/cli.hpp"

int main(int argc, char** argv) {
  return rigidflow::cli::run(std::vector<std::string>(argv, argv + argc));
}
