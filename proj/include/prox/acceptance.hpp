#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace prox::acceptance {

struct Result {
  int id = 0;
  std::string name;
  bool pass = false;
  std::string detail;
  double seconds = 0;
};

// const-band kavd-band kavd-space knn-query rough density coreset tail-drop locate quorum sampling exact-laws
const std::vector<std::string>& suite_names();

// throws InvalidArgument on an unknown name; "all" is not a suite name here
Result run_suite(const std::string& name);

// one line per result
void print(std::ostream& out, const Result& r);

}  // namespace prox::acceptance
