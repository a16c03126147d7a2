#pragma once

#include "dagsim/clock.hpp"
#include "dagsim/committer.hpp"
#include "dagsim/contracts.hpp"
#include "dagsim/endorser.hpp"
#include "dagsim/harness.hpp"
#include "dagsim/model.hpp"
#include "dagsim/orderer.hpp"
#include "dagsim/plot.hpp"
#include "dagsim/workload.hpp"
