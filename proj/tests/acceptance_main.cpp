// Runs the acceptance battery and prints one PASS/FAIL line per criterion.
#include <cstdio>
#include <cstdlib>
#include <string>

#include "regulab/acceptance.hpp"

int main(int argc, char** argv) {
  regulab::AcceptanceOptions opts;
  for (int i = 1; i < argc; ++i) opts.only.push_back(std::atoi(argv[i]));
  const auto results = regulab::run_acceptance(opts);
  int failed = 0;
  for (const auto& r : results) {
    std::printf("%s  criterion %2d  %-38s %s\n", r.pass ? "PASS" : "FAIL", r.id, r.title.c_str(), r.detail.c_str());
    if (!r.pass) ++failed;
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(results.size()) - failed, results.size());
  return failed == 0 ? 0 : 1;
}
