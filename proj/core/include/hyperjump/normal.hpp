// Copyright 2026 The HyperJump Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// =============================================================================

#pragma once

#include <cmath>

namespace hyperjump {

inline constexpr double kInvSqrt2Pi = 0.398942280401432677939946059934;

inline double norm_pdf(double z) { return kInvSqrt2Pi * std::exp(-0.5 * z * z); }

inline double norm_cdf(double z) { return 0.5 * std::erfc(-z * M_SQRT1_2); }

/// Upper tail 1 - Phi(z), accurate for large positive z.
inline double norm_sf(double z) { return 0.5 * std::erfc(z * M_SQRT1_2); }

/// log Phi(z), accurate in both tails.
inline double norm_logcdf(double z) {
  if (z > -5.0) return std::log1p(-norm_sf(z));
  // Asymptotic series for the far lower tail; erfc underflows below ~-38.
  if (z > -30.0) return std::log(norm_cdf(z));
  const double z2 = z * z;
  return -0.5 * z2 - std::log(-z) - 0.918938533204672741780329736406 +
         std::log1p(-1.0 / z2 + 3.0 / (z2 * z2));
}

}  // namespace hyperjump
