#pragma once

#include "duffing/errors.hpp"
#include "duffing/fock.hpp"
#include "duffing/krylov.hpp"
#include "duffing/lindblad.hpp"
#include "duffing/hypergeometric.hpp"
#include "duffing/closed_form.hpp"
#include "duffing/phase_space.hpp"
#include "duffing/perturbation.hpp"
#include "duffing/semiclassical.hpp"
#include "duffing/circuit.hpp"
#include "duffing/parallel.hpp"
#include "duffing/sweep.hpp"
