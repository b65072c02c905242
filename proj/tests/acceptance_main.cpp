// One line per acceptance criterion. Optional arguments select criteria by id.
#include <cstdio>
#include <cstdlib>
#include <string>
#include <vector>

#include "nhemit/acceptance.hpp"

int main(int argc, char** argv) {
  std::vector<int> ids;
  bool verbose = false;
  for (int i = 1; i < argc; ++i) {
    if (std::string(argv[i]) == "-v") verbose = true;
    else ids.push_back(std::atoi(argv[i]));
  }
  if (ids.empty())
    for (const auto& c : nhemit::criteria()) ids.push_back(c.id);
  int failed = 0;
  for (int id : ids) {
    auto r = nhemit::run_criterion(id);
    std::printf("%s criterion %2d  %-30s %8.1fs  %s\n", r.passed ? "PASS" : "FAIL", r.id, r.name.c_str(), r.seconds,
                r.summary.c_str());
    if (verbose) std::printf("%s\n", r.details.dump(1).c_str());
    std::fflush(stdout);
    if (!r.passed) ++failed;
  }
  return failed == 0 ? 0 : 1;
}
