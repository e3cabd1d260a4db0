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

#ifndef AASV_GRADCHECK_HPP
#define AASV_GRADCHECK_HPP

#include <functional>
#include <vector>

#include "aasv/tensor.hpp"

namespace aasv {

// Central-difference gradient verification. The caller computes analytic
// gradients into param.grad beforehand; loss_fn re-evaluates the loss only
// (deterministically) and is called with perturbed parameter values.
// Relative error per coordinate uses max(|analytic|, |numeric|, 1e-8) as
// the denominator; returns the maximum over all checked coordinates.
// If max_coords_per_param > 0, a deterministic stride subsample of the
// coordinates is checked instead of all of them.
double finite_diff_check(const std::function<double()>& loss_fn,
                         std::vector<Parameter*> params, double epsilon,
                         std::size_t max_coords_per_param = 0);

}  // namespace aasv

#endif  // AASV_GRADCHECK_HPP
