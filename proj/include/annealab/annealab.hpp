// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "annealab/curve.hpp"
#include "annealab/errors.hpp"
#include "annealab/ingest.hpp"
#include "annealab/io.hpp"
#include "annealab/lawfit.hpp"
#include "annealab/optim.hpp"
#include "annealab/parallel.hpp"
#include "annealab/recommend.hpp"
#include "annealab/rng.hpp"
#include "annealab/schedule.hpp"
#include "annealab/terms.hpp"
#include "annealab/toytrain.hpp"
