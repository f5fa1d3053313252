#pragma once

#include "tbprop/errors.hpp"
#include "tbprop/types.hpp"
#include "tbprop/lattice.hpp"
#include "tbprop/bessel.hpp"
#include "tbprop/propagator.hpp"
#include "tbprop/sequences.hpp"
#include "tbprop/gaussian.hpp"
#include "tbprop/fock.hpp"
#include "tbprop/wigner.hpp"
#include "tbprop/correlations.hpp"
#include "tbprop/bench.hpp"
#include "tbprop/io.hpp"
