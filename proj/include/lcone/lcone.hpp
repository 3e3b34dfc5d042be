#pragma once

#include "lcone/error.hpp"
#include "lcone/legendre.hpp"
#include "lcone/spectral.hpp"
#include "lcone/cross_section.hpp"
#include "lcone/lorentz.hpp"
#include "lcone/lorentz_action.hpp"
#include "lcone/families.hpp"
#include "lcone/flow.hpp"
#include "lcone/estimates.hpp"
#include "lcone/compactness.hpp"
#include "lcone/io.hpp"
