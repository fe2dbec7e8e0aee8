#ifndef DNLS_DNLS_HPP
#define DNLS_DNLS_HPP

#include "breather.hpp"
#include "diagnostics.hpp"
#include "dimension.hpp"
#include "driving.hpp"
#include "errors.hpp"
#include "integrator.hpp"
#include "lattice.hpp"
#include "model.hpp"
#include "monitor.hpp"
#include "parallel.hpp"
#include "states.hpp"

#endif
