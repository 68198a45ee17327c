#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <string>
#include <vector>

#include "gpwells/verify.hpp"

// Criteria known to fail at desk scale; they still print FAIL, but only
// unexpected failures set the exit status. See README, "Known failures".
const std::vector<int> kRecordedDeviations = {9};

int main(int argc, char** argv) {
  gpwells::VerifyOptions opt;
  for (int i = 1; i < argc; ++i) opt.only.push_back(std::atoi(argv[i]));
  opt.log = [](const std::string& s) { std::fprintf(stderr, "%s\n", s.c_str()); };
  opt.on_result = [](const gpwells::CriterionResult& r) {
    std::printf("%s\n", gpwells::format_result(r).c_str());
    std::fflush(stdout);
  };
  int failed = 0, unexpected = 0;
  for (const auto& r : gpwells::run_verification(opt)) {
    if (r.pass) continue;
    ++failed;
    const bool recorded =
        std::find(kRecordedDeviations.begin(), kRecordedDeviations.end(), r.id) != kRecordedDeviations.end();
    if (!recorded) ++unexpected;
  }
  std::printf("%d criteria failed, %d of them unexpected\n", failed, unexpected);
  return unexpected ? 1 : 0;
}
