#pragma once

/// \file
/// Umbrella header for the submersion verification toolkit.

#include "oneill/jet.hpp"
#include "oneill/linalg.hpp"
#include "oneill/expr.hpp"
#include "oneill/dsl.hpp"
#include "oneill/parallel.hpp"
#include "oneill/geometry.hpp"
#include "oneill/submersion.hpp"
#include "oneill/sampling.hpp"
#include "oneill/report.hpp"
#include "oneill/identities.hpp"
#include "oneill/validate.hpp"
#include "oneill/geodesic.hpp"
#include "oneill/integral.hpp"
#include "oneill/catalog.hpp"
