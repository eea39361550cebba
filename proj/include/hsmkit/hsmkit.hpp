#ifndef HSMKIT_HSMKIT_HPP
#define HSMKIT_HSMKIT_HPP

// Umbrella header.

#include "baselines.hpp"
#include "diagnostics.hpp"
#include "errors.hpp"
#include "estimation.hpp"
#include "io.hpp"
#include "linalg.hpp"
#include "model.hpp"
#include "quantum.hpp"
#include "rng.hpp"
#include "tables.hpp"
#include "version.hpp"

#endif
