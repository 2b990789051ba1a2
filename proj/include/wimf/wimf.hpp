#pragma once

#include "wimf/datagen.hpp"
#include "wimf/errors.hpp"
#include "wimf/io.hpp"
#include "wimf/metrics.hpp"
#include "wimf/polar.hpp"
#include "wimf/solver.hpp"
#include "wimf/spectral.hpp"
