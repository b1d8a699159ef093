#include "dimer/rng.hpp"

namespace dimer {

static_assert(mix64(0) == 0xE220A8397B1DCDAFULL, "SplitMix64 reference value");

} // namespace dimer
