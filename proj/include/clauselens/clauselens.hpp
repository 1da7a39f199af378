#pragma once

// Umbrella header for the full quoting pipeline.

#include "clauselens/clause_store.hpp"
#include "clauselens/config.hpp"
#include "clauselens/corpus_gen.hpp"
#include "clauselens/defaults.hpp"
#include "clauselens/errors.hpp"
#include "clauselens/evaluation.hpp"
#include "clauselens/justifier.hpp"
#include "clauselens/loss_model.hpp"
#include "clauselens/market_env.hpp"
#include "clauselens/observation_builder.hpp"
#include "clauselens/policy_value_net.hpp"
#include "clauselens/pricing.hpp"
#include "clauselens/risk_duals.hpp"
#include "clauselens/rng.hpp"
#include "clauselens/serialize.hpp"
#include "clauselens/trainer.hpp"
#include "clauselens/treaty_domain.hpp"
#include "clauselens/world.hpp"
