#pragma once

#include <optional>
#include <string>

#include "bats/fit.hpp"
#include "bats/seasonal_model.hpp"

namespace bats {

/// One serialized model document: the coefficients plus enough context
/// (basis, covariate, metadata, fit diagnostics) to answer any query later.
/// Serialization is canonical: write -> read -> write is byte-identical.
struct ModelDocument {
  enum class Kind { bats, skew_normal, gpd };
  Kind kind = Kind::bats;
  std::optional<SeasonalBatsModel> bats;
  std::optional<SeasonalSkewNormalModel> skew;
  std::optional<SeasonalGpdModel> gpd;
  FitDiagnostics diagnostics;
};

std::string to_json_text(const ModelDocument& doc);
ModelDocument from_json_text(const std::string& text);

void save_model(const ModelDocument& doc, const std::string& path);
ModelDocument load_model(const std::string& path);

}  // namespace bats
