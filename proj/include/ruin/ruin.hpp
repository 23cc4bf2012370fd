#pragma once

#include "ruin/errors.hpp"
#include "ruin/model.hpp"
#include "ruin/model_io.hpp"
#include "ruin/spectral.hpp"
#include "ruin/asymptotics.hpp"
#include "ruin/twist.hpp"
#include "ruin/simulate.hpp"
