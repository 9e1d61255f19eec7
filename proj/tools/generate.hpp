#pragma once

#include <cstdint>

#include "io.hpp"

namespace apep::io {

struct GenParams {
  std::size_t n = 5;
  std::size_t k = 3;
  double density = 0.5;
  std::size_t bod_u = 0;
  std::size_t bod_e = 0;
  std::size_t sod_u = 0;
  std::size_t sod_e = 0;
  std::size_t implication = 0;
  std::size_t global_card = 0;
  std::size_t local_card = 0;
  std::size_t smer = 0;
  std::size_t team_sod = 0;
  std::uint32_t t_min = 1;
  std::uint32_t t_max = 3;
  std::uint64_t seed = 1;
};

/// Deterministic for a fixed seed. Pair constraints use distinct resource
/// pairs; other constraints are sampled without duplicates. Throws
/// InvalidInput when the counts cannot be met.
InstanceFile generate(const GenParams& params);

Json params_to_json(const GenParams& params);
GenParams params_from_json(const Json& j);

}  // namespace apep::io
