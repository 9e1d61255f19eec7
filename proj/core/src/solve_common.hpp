#pragma once

#include <chrono>
#include <initializer_list>
#include <string>

#include "apep/error.hpp"
#include "apep/model.hpp"

namespace apep::detail {

class Stopwatch {
public:
  double seconds() const { return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count(); }

private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

inline void require_species(const Instance& inst, std::initializer_list<Species> allowed, const char* solver) {
  for (const auto& c : inst.constraints()) {
    const auto s = species_of(c);
    bool ok = false;
    for (auto a : allowed) ok = ok || a == s;
    if (!ok)
      throw UnsupportedMix(std::string(solver) + " does not accept " + std::string(to_string(s)) + " constraints");
  }
}

}  // namespace apep::detail
