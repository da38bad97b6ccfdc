#ifndef PAULI_PAULI_HPP
#define PAULI_PAULI_HPP

#include "pauli/errors.hpp"
#include "pauli/grid.hpp"
#include "pauli/potentials.hpp"
#include "pauli/spectral.hpp"
#include "pauli/propagator.hpp"
#include "pauli/fidelity.hpp"
#include "pauli/thermal.hpp"
#include "pauli/experiments.hpp"

#endif  // PAULI_PAULI_HPP
