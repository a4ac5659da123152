#pragma once

#include "gms/market_model.hpp"
#include "gms/mechanisms.hpp"
#include "gms/population.hpp"
#include "gms/feedback.hpp"
#include "gms/sim_engine.hpp"
#include "gms/config.hpp"
#include "gms/report.hpp"
