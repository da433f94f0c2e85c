#include <fmt/format.h>

#include <cstdio>

#include "topoflow/verify.hpp"

int main() {
  topoflow::verify::Options opt;
  int failed = 0;
  topoflow::verify::run_all(opt, [&](const topoflow::verify::CriterionResult& r) {
    std::puts(topoflow::verify::format_line(r).c_str());
    std::fflush(stdout);
    if (!r.pass) ++failed;
  });
  fmt::print("{} of 12 criteria passed\n", 12 - failed);
  return failed == 0 ? 0 : 1;
}
