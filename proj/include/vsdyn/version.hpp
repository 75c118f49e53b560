#pragma once
// Engine version, recorded in run manifests so outputs can be traced back to
// the code that produced them.

namespace vsdyn {

inline constexpr const char* kEngineVersion = "0.1.0";

// Version of the scenario text format accepted by the parser.
inline constexpr int kScenarioFormatVersion = 1;

}  // namespace vsdyn
