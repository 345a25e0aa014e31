#pragma once

#include <cstddef>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

namespace tga {

enum ExitStatus : int {
  kExitOk = 0,
  kExitValidation = 1,
  kExitUsage = 2,
  kExitAnalysis = 3,
};

// `args` excludes the program name. Output goes to `out`, diagnostics to `err`.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int run_cli(int argc, char** argv);

// Worker count from TGA_THREADS (>= 1), else the hardware concurrency.
std::size_t worker_count();

// Runs body(0..n-1) on up to `workers` threads. The first exception in index
// order is rethrown after all workers finish.
void parallel_for(std::size_t n, std::size_t workers, const std::function<void(std::size_t)>& body);

}  // namespace tga
