#pragma once

#include "mscw/errors.hpp"
#include "mscw/exactdist.hpp"
#include "mscw/glauber.hpp"
#include "mscw/landscape.hpp"
#include "mscw/limits.hpp"
#include "mscw/linalg.hpp"
#include "mscw/model.hpp"
#include "mscw/numeric.hpp"
#include "mscw/quadrature.hpp"
#include "mscw/serialize.hpp"
#include "mscw/version.hpp"
