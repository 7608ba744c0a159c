/*
   Copyright 2026 The fbdg Authors

   Licensed under the Apache License, Version 2.0 (the "License");
   you may not use this file except in compliance with the License.
   You may obtain a copy of the License at

       http://www.apache.org/licenses/LICENSE-2.0

   Unless required by applicable law or agreed to in writing, software
   distributed under the License is distributed on an "AS IS" BASIS,
   WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
   See the License for the specific language governing permissions and
   limitations under the License.
*/

#include "fbdg/error.hpp"

namespace fbdg {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kDomain: return "domain error";
    case ErrorCode::kConvergence: return "convergence error";
    case ErrorCode::kInvertedBand: return "inverted band";
    case ErrorCode::kSingularMode: return "singular mode";
    case ErrorCode::kNoCriticalAmplitude: return "no critical amplitude";
    case ErrorCode::kInconsistentMeasurement: return "inconsistent measurement";
    case ErrorCode::kIntegratorTolerance: return "integrator tolerance";
    case ErrorCode::kInsufficientData: return "insufficient data";
    case ErrorCode::kBootstrapUnstable: return "bootstrap unstable";
    case ErrorCode::kBlowUp: return "field blow-up";
    case ErrorCode::kGrid: return "grid error";
    case ErrorCode::kConfig: return "config error";
    case ErrorCode::kParse: return "parse error";
    case ErrorCode::kIo: return "i/o error";
  }
  return "unknown error";
}

bool is_config_error(ErrorCode code) {
  return code == ErrorCode::kConfig || code == ErrorCode::kParse || code == ErrorCode::kIo;
}

}  // namespace fbdg
