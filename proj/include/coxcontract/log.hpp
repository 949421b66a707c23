#pragma once

// Verbosity gate: diagnostics go to stderr only when COXCONTRACT_LOG is set.

#include <cstdlib>
#include <iostream>
#include <string>

namespace coxcontract {

inline bool log_enabled() {
  static const bool enabled = std::getenv("COXCONTRACT_LOG") != nullptr;
  return enabled;
}

inline void log_line(const std::string& msg) {
  if (log_enabled()) std::cerr << "[coxcontract] " << msg << "\n";
}

}  // namespace coxcontract
