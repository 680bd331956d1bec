#pragma once

#include <vector>

#include "qdecomp/sample.hpp"

namespace qdecomp::testing {

// Eight-point fixture: f control {10,20}, f treated {15,25},
// m control {30,40}, m treated {35,45}; unit weights.
inline WeightedSample eight_point() {
  std::vector<Observation> obs = {
      {10, 0, 1, 0, {}}, {20, 0, 1, 0, {}}, {15, 1, 1, 0, {}}, {25, 1, 1, 0, {}},
      {30, 0, 1, 1, {}}, {40, 0, 1, 1, {}}, {35, 1, 1, 1, {}}, {45, 1, 1, 1, {}},
  };
  return WeightedSample(std::move(obs), {"f", "m"});
}

inline WeightedSample arms(const std::vector<double>& control, const std::vector<double>& treated,
                           const std::vector<double>& wc = {}, const std::vector<double>& wt = {}) {
  std::vector<Observation> obs;
  for (std::size_t i = 0; i < control.size(); ++i) {
    obs.push_back({control[i], 0, wc.empty() ? 1.0 : wc[i], 0, {}});
  }
  for (std::size_t i = 0; i < treated.size(); ++i) {
    obs.push_back({treated[i], 1, wt.empty() ? 1.0 : wt[i], 0, {}});
  }
  return WeightedSample(std::move(obs), {"all"});
}

inline constexpr const char* kEightPointCsv =
    "y,d,g\n10,0,f\n20,0,f\n15,1,f\n25,1,f\n30,0,m\n40,0,m\n35,1,m\n45,1,m\n";

}  // namespace qdecomp::testing
