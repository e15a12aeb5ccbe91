#pragma once

#include "finsleroid/constants.hpp"
#include "finsleroid/errors.hpp"
#include "finsleroid/types.hpp"
#include "finsleroid/finite_difference.hpp"
#include "finsleroid/metric_function.hpp"
#include "finsleroid/metric_tensor.hpp"
#include "finsleroid/quasi_map.hpp"
#include "finsleroid/conformal_map.hpp"
#include "finsleroid/gamma.hpp"
#include "finsleroid/fields.hpp"
#include "finsleroid/regulators.hpp"
#include "finsleroid/wavefronts.hpp"
#include "finsleroid/o1_approx.hpp"
#include "finsleroid/sampling.hpp"
#include "finsleroid/verify.hpp"
