#pragma once

// Umbrella header: the whole width- and span-bounded decomposition toolkit.

#include "tdspan/classical.hpp"
#include "tdspan/core.hpp"
#include "tdspan/decomposition.hpp"
#include "tdspan/ef.hpp"
#include "tdspan/falsifier.hpp"
#include "tdspan/gadgets.hpp"
#include "tdspan/io.hpp"
#include "tdspan/isomorphism.hpp"
#include "tdspan/plans.hpp"
#include "tdspan/structure.hpp"
#include "tdspan/sweeps.hpp"
