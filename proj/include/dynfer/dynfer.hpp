#pragma once

#include "dynfer/errors.hpp"
#include "dynfer/known_dp.hpp"
#include "dynfer/model.hpp"
#include "dynfer/offline_dp.hpp"
#include "dynfer/online_dp.hpp"
#include "dynfer/oracle.hpp"
#include "dynfer/rng.hpp"
#include "dynfer/serialize.hpp"
