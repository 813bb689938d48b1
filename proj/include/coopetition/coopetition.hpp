#pragma once

#include "coopetition/auction.hpp"
#include "coopetition/config.hpp"
#include "coopetition/equilibrium.hpp"
#include "coopetition/errors.hpp"
#include "coopetition/multi_lte.hpp"
#include "coopetition/numerics.hpp"
#include "coopetition/oracle.hpp"
#include "coopetition/parallel.hpp"
#include "coopetition/provider.hpp"
#include "coopetition/report.hpp"
#include "coopetition/rng.hpp"
#include "coopetition/simulation.hpp"
#include "coopetition/type_distribution.hpp"
