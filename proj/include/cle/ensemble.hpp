#pragma once

#include <cstdint>
#include <functional>
#include <string>

#include "cle/loops.hpp"
#include "cle/rng.hpp"

namespace cle {

// A reproducible ensemble of loop configurations. Members are regenerated on
// demand from (seed, stage, replica); nothing is held in memory.
struct EnsembleSpec {
  LatticeSpec lattice;
  std::size_t replicas = 100;
  std::uint64_t seed = 0;
  std::string stage = "ensemble";
  int sweeps = 200;  // square-fk only

  std::uint64_t member_seed(std::size_t r) const { return derive_seed(seed, stage, r); }
  std::uint64_t weight_seed(std::size_t r) const { return derive_seed(seed, stage + "/weights", r); }
};

SiteConfiguration sample_configuration(const LatticeSpec& spec, std::uint64_t seed, int sweeps);

LoopConfiguration sample_member(const EnsembleSpec& ensemble, std::size_t replica);

// Calls fn(replica, loops) for every member in replica order.
void for_each_member(const EnsembleSpec& ensemble,
                     const std::function<void(std::size_t, const LoopConfiguration&)>& fn);

}  // namespace cle
