#pragma once

#include <string>
#include <string_view>

#include "assetowner/models.hpp"

namespace assetowner {

inline constexpr int kModelSchemaVersion = 1;

// Doubles are written in shortest round-trip form, so a reloaded model
// predicts bit-identically.
std::string model_to_json(const FittedModel& model);
FittedModel model_from_json(std::string_view text);  // throws ModelError

}  // namespace assetowner
