#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "llmprint/core/calibration.hpp"
#include "llmprint/core/fingerprint.hpp"

namespace llmprint {

inline constexpr int kFingerprintFormatVersion = 1;
inline constexpr int kCalibrationFormatVersion = 1;
inline constexpr int kPairListFormatVersion = 1;

nlohmann::json to_json(const FingerprintSet& set);
FingerprintSet fingerprint_set_from_json(const nlohmann::json& doc);

/// Versioned pair list, as emitted by the pair sampler.
nlohmann::json pair_list_to_json(const std::vector<TokenPair>& pairs);
std::vector<TokenPair> pair_list_from_json(const nlohmann::json& doc);

nlohmann::json to_json(const CalibrationModel& model);
CalibrationModel calibration_from_json(const nlohmann::json& doc);

/// Canonical text form: two-space indented JSON with a trailing newline.
std::string serialize(const FingerprintSet& set);
std::string serialize(const CalibrationModel& model);
FingerprintSet deserialize_fingerprints(std::string_view text);
CalibrationModel deserialize_calibration(std::string_view text);

std::string dump_canonical(const nlohmann::json& doc);
std::string read_text_file(const std::filesystem::path& path);
/// Throws Error when the file cannot be written.
void write_text_file(const std::filesystem::path& path, std::string_view text);

}  // namespace llmprint
