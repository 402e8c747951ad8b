#pragma once

#include "types.hpp"
#include "errors.hpp"
#include "quadrature.hpp"
#include "angular_function.hpp"
#include "mellin_symbol.hpp"
#include "spectrum.hpp"
#include "transmission_1d.hpp"
#include "mellin_numerics.hpp"
#include "io.hpp"
#include "svg.hpp"
#include "config.hpp"
