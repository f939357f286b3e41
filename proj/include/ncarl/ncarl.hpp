#pragma once

#include "ncarl/correlation.hpp"
#include "ncarl/errors.hpp"
#include "ncarl/io.hpp"
#include "ncarl/masked.hpp"
#include "ncarl/metrics.hpp"
#include "ncarl/oracle.hpp"
#include "ncarl/rows.hpp"
#include "ncarl/solver.hpp"
#include "ncarl/spectral.hpp"
#include "ncarl/synthetic.hpp"
