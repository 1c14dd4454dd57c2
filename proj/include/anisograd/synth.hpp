#pragma once

#include <cstdint>
#include <string>

#include "anisograd/dataset.hpp"

namespace anisograd {

// Census-style sparse binary generator: every sample picks one category per
// one-hot attribute group (a handful of groups can be missing), category
// frequencies are heavy-tailed, and labels come from a noisy sparse logistic
// ground truth, so the optimum is finite and the feature spectrum shows the
// strong imbalance the adult-income family of datasets is known for.
struct CensusSynthConfig {
  int64_t n = 32561;
  uint64_t seed = 7;
  double missing_prob = 0.01;    // per-group chance a sample skips the group
  double positive_rate = 0.24;   // calibrated via the intercept
  double weight_scale = 0.5;     // std of the ground-truth weights; keeps heavy
                                 // label noise so the logistic problem has an
                                 // interior optimum instead of separating
};

Dataset make_census_synth(const CensusSynthConfig& cfg);

// Resolve a --dataset argument: a filesystem path, or a synthetic spec of the
// form "synth:census[:key=value,...]" with keys n, seed. Shorthands
// "synth:a4a-like", "synth:a6a-like", "synth:a9a-like" pick the matching n.
Dataset make_dataset(const std::string& spec, int dim_override = 0, bool add_bias = false);

// true if the spec names a generator rather than a file
bool is_synth_spec(const std::string& spec);

}  // namespace anisograd
