// mqed.hpp: umbrella header

#pragma once

#include "mqed/errors.hpp"
#include "mqed/constants.hpp"
#include "mqed/linalg.hpp"
#include "mqed/permittivity.hpp"
#include "mqed/atom.hpp"
#include "mqed/quadrature.hpp"
#include "mqed/modes.hpp"
#include "mqed/greens.hpp"
#include "mqed/identities.hpp"
#include "mqed/decay.hpp"
#include "mqed/master.hpp"

namespace mqed {

inline constexpr const char* version = "0.1.0";

} // namespace mqed
