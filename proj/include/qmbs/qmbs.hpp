#pragma once

#include "qmbs/dynamics.hpp"
#include "qmbs/entanglement.hpp"
#include "qmbs/error.hpp"
#include "qmbs/fockspace.hpp"
#include "qmbs/io.hpp"
#include "qmbs/lattice.hpp"
#include "qmbs/operators.hpp"
#include "qmbs/parentcheck.hpp"
#include "qmbs/rng.hpp"
#include "qmbs/scars.hpp"
#include "qmbs/spectra.hpp"
