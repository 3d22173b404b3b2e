#include <cstdio>
#include <cstdlib>
#include <string>

#include "support/fixture.hpp"

// Regenerates the synthetic sample corpus. data/sample_events.csv in the
// repository is the output of the defaults (320 rows, seed 7).
int main(int argc, char** argv) {
  gridshap::testing::FixtureSpec spec;
  std::string path = "sample_events.csv";
  for (int i = 1; i < argc; ++i) {
    const std::string arg = argv[i];
    auto value = [&]() -> const char* {
      if (i + 1 >= argc) {
        std::fprintf(stderr, "missing value for %s\n", arg.c_str());
        std::exit(2);
      }
      return argv[++i];
    };
    if (arg == "--rows") {
      spec.rows = std::atoi(value());
    } else if (arg == "--seed") {
      spec.seed = static_cast<std::uint64_t>(std::strtoull(value(), nullptr, 10));
    } else if (arg == "--out") {
      path = value();
    } else if (arg == "--no-inf") {
      spec.inject_inf = false;
    } else {
      std::fprintf(stderr, "usage: gen_fixture [--rows N] [--seed S] [--out PATH] [--no-inf]\n");
      return 2;
    }
  }
  gridshap::testing::write_fixture(path, spec);
  std::printf("%s: %d rows, seed %llu\n", path.c_str(), spec.rows,
              static_cast<unsigned long long>(spec.seed));
  return 0;
}
