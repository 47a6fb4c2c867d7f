#pragma once

#include "shrinkinfo/assess.hpp"
#include "shrinkinfo/errors.hpp"
#include "shrinkinfo/estimators.hpp"
#include "shrinkinfo/hyptest.hpp"
#include "shrinkinfo/mc.hpp"
#include "shrinkinfo/model.hpp"
#include "shrinkinfo/moments.hpp"
#include "shrinkinfo/random.hpp"
#include "shrinkinfo/version.hpp"
