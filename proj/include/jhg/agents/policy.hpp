#pragma once

#include "jhg/agents/cab.hpp"
#include "jhg/agents/parameterization.hpp"
#include "jhg/agents/random_policy.hpp"
#include "jhg/agents/tft.hpp"

namespace jhg {

inline AllocationVector decide(const Parameterization& params, const StateView& view, Rng& rng) {
  return params.kind == ModelKind::TFT ? tft_policy(view, params, rng) : cab_policy(view, params, rng);
}

inline Policy make_policy(Parameterization params) {
  validate(params);
  return [p = std::move(params)](const StateView& v, Rng& rng) { return decide(p, v, rng); };
}

inline Policy make_random_policy(RandomProfile profile) {
  validate(profile);
  return [profile](const StateView& v, Rng& rng) { return random_policy(v, profile, rng); };
}

inline Policy all_keep_policy() {
  return [](const StateView& v, Rng&) { return AllocationVector::all_keep(v.self, v.players(), v.tokens_per_round); };
}

}  // namespace jhg
