#pragma once

// Umbrella header.

#include "error.hpp"
#include "lattice.hpp"
#include "special_functions.hpp"
#include "divisor.hpp"
#include "theta_quotient.hpp"
#include "riccati.hpp"
#include "classifier.hpp"
#include "expr.hpp"
#include "document.hpp"
#include "selftest.hpp"
