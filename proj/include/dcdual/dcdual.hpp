// Umbrella header.

#ifndef DCDUAL_DCDUAL_HPP
#define DCDUAL_DCDUAL_HPP

#include "dcdual/baseline.hpp"
#include "dcdual/conjugate.hpp"
#include "dcdual/critical.hpp"
#include "dcdual/curvature.hpp"
#include "dcdual/gap.hpp"
#include "dcdual/harness.hpp"
#include "dcdual/io.hpp"
#include "dcdual/linalg.hpp"
#include "dcdual/problem.hpp"

#endif  // DCDUAL_DCDUAL_HPP
