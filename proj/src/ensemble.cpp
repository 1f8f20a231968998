#include "cle/ensemble.hpp"

namespace cle {

SiteConfiguration sample_configuration(const LatticeSpec& spec, std::uint64_t seed, int sweeps) {
  if (spec.geometry == Geometry::TriangularSite) return sample_percolation(spec, seed);
  return sample_fk_ising(spec, seed, sweeps);
}

LoopConfiguration sample_member(const EnsembleSpec& ensemble, std::size_t replica) {
  return extract_loops(sample_configuration(ensemble.lattice, ensemble.member_seed(replica), ensemble.sweeps));
}

void for_each_member(const EnsembleSpec& ensemble,
                     const std::function<void(std::size_t, const LoopConfiguration&)>& fn) {
  for (std::size_t r = 0; r < ensemble.replicas; ++r) fn(r, sample_member(ensemble, r));
}

}  // namespace cle
