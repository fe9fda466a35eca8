// runs the acceptance suites; arguments select suites, default is all of them
#include <iostream>

#include "prox/acceptance.hpp"
#include "prox/errors.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> names(argv + 1, argv + argc);
  if (names.empty()) names = prox::acceptance::suite_names();
  int failed = 0;
  try {
    for (const auto& n : names) {
      const auto r = prox::acceptance::run_suite(n);
      prox::acceptance::print(std::cout, r);
      std::cout.flush();
      failed += !r.pass;
    }
  } catch (const prox::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  std::cout << (failed ? "FAILED " : "ALL PASSED ") << failed << " of " << names.size() << " failing\n";
  return failed ? 1 : 0;
}
