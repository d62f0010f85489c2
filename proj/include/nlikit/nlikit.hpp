#pragma once

#include "nlikit/domain.hpp"
#include "nlikit/errors.hpp"
#include "nlikit/gn_oracle.hpp"
#include "nlikit/kernels.hpp"
#include "nlikit/nli_engine.hpp"
#include "nlikit/poly_fit.hpp"
#include "nlikit/quadrature.hpp"
#include "nlikit/special_functions.hpp"
#include "nlikit/spp.hpp"
#include "nlikit/units.hpp"

namespace nlikit {
inline constexpr const char* kVersion = "0.1.0";
}
