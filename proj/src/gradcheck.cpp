// Copyright 2026 AASV toolkit authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.

#include "aasv/gradcheck.hpp"

#include <algorithm>
#include <cmath>

namespace aasv {

double finite_diff_check(const std::function<double()>& loss_fn,
                         std::vector<Parameter*> params, double epsilon,
                         std::size_t max_coords_per_param) {
  double max_rel = 0.0;
  for (Parameter* p : params) {
    const std::size_t n = p->value.size();
    std::size_t stride = 1;
    if (max_coords_per_param > 0 && n > max_coords_per_param)
      stride = (n + max_coords_per_param - 1) / max_coords_per_param;
    for (std::size_t i = 0; i < n; i += stride) {
      const float saved = p->value[i];
      // Measure the perturbation actually representable in f32; dividing
      // by the nominal epsilon would alias its rounding into the result.
      const float plus = float(double(saved) + epsilon);
      const float minus = float(double(saved) - epsilon);
      p->value[i] = plus;
      const double f_plus = loss_fn();
      p->value[i] = minus;
      const double f_minus = loss_fn();
      p->value[i] = saved;
      const double numeric =
          (f_plus - f_minus) / (double(plus) - double(minus));
      const double analytic = p->grad[i];
      const double denom =
          std::max({std::fabs(analytic), std::fabs(numeric), 1e-8});
      max_rel = std::max(max_rel, std::fabs(analytic - numeric) / denom);
    }
  }
  return max_rel;
}

}  // namespace aasv
