#include "cayley/error.hpp"
#include "families.hpp"

namespace cayley {

State uniform_state(const GraphSpec& spec, Rng& rng) {
  if (spec.goals().size() != 1 || spec.goals().front() != spec.identity()) {
    // The samplers below draw from the identity's component, which is the
    // whole group for sl2p and cube2 but not a general orbit.
    if (spec.family() == Family::kCube3) {
      throw DomainError("uniform_state: cube3 sampler assumes the identity goal");
    }
  }
  switch (spec.family()) {
    case Family::kSl2p: return sl2p_uniform(spec, rng);
    case Family::kCube2:
    case Family::kCube3: return cube_uniform(spec, rng);
    case Family::kGenericPerm: break;
  }
  throw DomainError(spec.label() + ": no uniform sampler for generic permutation groups");
}

}  // namespace cayley
