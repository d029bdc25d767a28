#pragma once

#include "devex/concentration.hpp"
#include "devex/error.hpp"
#include "devex/exponents.hpp"
#include "devex/fisher.hpp"
#include "devex/montecarlo.hpp"
#include "devex/probdist.hpp"
