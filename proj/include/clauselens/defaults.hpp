#pragma once

#include "clauselens/config.hpp"

namespace clauselens {

/// Canonical run configuration: every tunable with its default, one section
/// per subsystem. `--print-config` emits exactly this (plus overlays).
inline ConfigFile default_config() {
  ConfigFile c;
  c.set("domain", "quota_share_levels", "0.1,0.2,0.3,0.4,0.5,0.6,0.7,0.8,0.9");
  c.set("domain", "attachment_levels", "2,5,10,20");
  c.set("domain", "limit_levels", "2,5,10");
  c.set("domain", "insured_value_bounds", "10,100");
  c.set("domain", "loss_ratio_bounds", "0,3");
  c.set("domain", "limit_bounds", "0,20");
  c.set("domain", "deductible_bounds", "0,10");

  c.set("env", "premium_loading", "0.15");
  c.set("env", "capital_base", "25");
  c.set("env", "capital_charge_rate", "0.02");
  c.set("env", "solvency_multiplier", "1.0");
  c.set("env", "price_cap_ratio", "0.12");
  c.set("env", "gamma", "0.99");

  c.set("cedent", "jurisdiction_mix",
        "US-FL:0.30,US-CA:0.20,EU-DE:0.20,AU:0.15,SG:0.15");
  c.set("cedent", "line_mix", "property-cat:0.6,casualty:0.4");
  c.set("cedent", "treaty_mix", "QS:0.40,CatXL:0.35,AggXL:0.25");
  c.set("cedent", "insured_value_range", "10,100");
  c.set("cedent", "loss_ratio_range", "0.3,1.5");
  c.set("cedent", "requested_limit_range", "2,10");
  c.set("cedent", "requested_deductible_range", "0,5");

  c.set("loss.US-FL", "event_rate", "1.4");
  c.set("loss.US-FL", "lognormal_mu", "0.4");
  c.set("loss.US-FL", "lognormal_sigma", "0.9");
  c.set("loss.US-FL", "pareto_alpha", "2.0");
  c.set("loss.US-FL", "pareto_xm", "4.0");
  c.set("loss.US-FL", "tail_probability", "0.10");

  c.set("loss.US-CA", "event_rate", "1.0");
  c.set("loss.US-CA", "lognormal_mu", "0.3");
  c.set("loss.US-CA", "lognormal_sigma", "0.8");
  c.set("loss.US-CA", "pareto_alpha", "2.3");
  c.set("loss.US-CA", "pareto_xm", "3.5");
  c.set("loss.US-CA", "tail_probability", "0.08");

  c.set("loss.EU-DE", "event_rate", "0.8");
  c.set("loss.EU-DE", "lognormal_mu", "0.2");
  c.set("loss.EU-DE", "lognormal_sigma", "0.7");
  c.set("loss.EU-DE", "pareto_alpha", "2.6");
  c.set("loss.EU-DE", "pareto_xm", "3.0");
  c.set("loss.EU-DE", "tail_probability", "0.06");

  c.set("loss.AU", "event_rate", "0.9");
  c.set("loss.AU", "lognormal_mu", "0.3");
  c.set("loss.AU", "lognormal_sigma", "0.8");
  c.set("loss.AU", "pareto_alpha", "2.4");
  c.set("loss.AU", "pareto_xm", "3.0");
  c.set("loss.AU", "tail_probability", "0.07");

  c.set("loss.SG", "event_rate", "0.6");
  c.set("loss.SG", "lognormal_mu", "0.1");
  c.set("loss.SG", "lognormal_sigma", "0.6");
  c.set("loss.SG", "pareto_alpha", "2.8");
  c.set("loss.SG", "pareto_xm", "2.5");
  c.set("loss.SG", "tail_probability", "0.05");

  c.set("retrieval", "k", "4");
  c.set("retrieval", "dim_c", "64");
  c.set("retrieval", "projection_seed", "1234");

  c.set("cvar", "alpha", "0.10");
  c.set("cvar", "epsilon", "0.05");
  c.set("cvar", "delta", "0.05");
  c.set("cvar", "eta", "2.0");

  c.set("train", "episodes_total", "100000");
  c.set("train", "batch_size", "512");
  c.set("train", "learning_rate", "0.0003");
  c.set("train", "gamma", "0.99");
  c.set("train", "ppo_clip", "0.2");
  c.set("train", "entropy_coef", "0.01");
  c.set("train", "value_coef", "0.5");
  c.set("train", "epochs_per_batch", "4");
  c.set("train", "minibatch_size", "128");
  c.set("train", "grad_clip_norm", "5.0");
  c.set("train", "lr_decay_factor", "0.5");
  c.set("train", "lr_floor", "0.00001");
  c.set("train", "spike_threshold", "2.0");
  c.set("train", "hidden_dim", "64");
  c.set("train", "seed", "7");
  c.set("train", "threads", "1");

  c.set("eval", "n_episodes", "5000");
  c.set("eval", "n_boot", "10000");
  c.set("eval", "seed", "99");
  c.set("eval", "threads", "1");

  c.set("corpus", "scale", "660");
  c.set("corpus", "seed", "42");
  return c;
}

}  // namespace clauselens
