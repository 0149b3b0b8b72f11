#pragma once

#include "infoloss/lindblad.hpp"

namespace test_support {

/// Random raw generator over `basis` that preserves the trace: a random
/// hermitian dissipator block and random Hamiltonian entries, with h_00 and the
/// real parts of h_a0 solved from the trace condition by Hilbert-Schmidt
/// projection.
infoloss::lindblad::RawGenerator random_raw(const infoloss::qm::OperatorBasis& basis, infoloss::SeededRng& rng);

}  // namespace test_support
