#pragma once

#include "mjn/ber_oracle.hpp"
#include "mjn/calibration.hpp"
#include "mjn/channel.hpp"
#include "mjn/errors.hpp"
#include "mjn/experiments.hpp"
#include "mjn/iq_ingest.hpp"
#include "mjn/modem.hpp"
#include "mjn/noise_physics.hpp"
#include "mjn/random.hpp"
#include "mjn/receiver_model.hpp"
#include "mjn/scenario.hpp"
#include "mjn/stats.hpp"
