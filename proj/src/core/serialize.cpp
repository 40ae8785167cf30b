#include "llmprint/core/serialize.hpp"

#include <fstream>
#include <sstream>

#include "llmprint/core/error.hpp"

namespace llmprint {
namespace {

using nlohmann::json;

const json& field(const json& obj, const char* key) {
  if (!obj.is_object()) throw FormatError("expected a JSON object");
  auto it = obj.find(key);
  if (it == obj.end()) throw FormatError(std::string("missing field '") + key + "'");
  return *it;
}

template <typename T>
T get_as(const json& obj, const char* key) {
  const json& v = field(obj, key);
  try {
    return v.get<T>();
  } catch (const json::exception& e) {
    throw FormatError(std::string("field '") + key + "': " + e.what());
  }
}

void check_version(const json& doc, int expected) {
  const json& v = field(doc, "version");
  if (!v.is_number_integer()) throw FormatError("'version' must be an integer");
  if (v.get<int>() != expected) {
    throw FormatError("unsupported format version " + v.dump() + " (expected " +
                      std::to_string(expected) + ")");
  }
}

json token_json(const Token& t) { return json{{"id", t.id}, {"surface", t.surface}}; }

Token token_from(const json& j) {
  const json& id = field(j, "id");
  if (!id.is_number_unsigned()) throw FormatError("token id must be a non-negative integer");
  return Token{id.get<TokenId>(), get_as<std::string>(j, "surface")};
}

TokenSequence ids_from(const json& j, const char* key) {
  const json& arr = field(j, key);
  if (!arr.is_array()) throw FormatError(std::string("'") + key + "' must be an array");
  TokenSequence out;
  for (const auto& v : arr) {
    if (!v.is_number_unsigned()) throw FormatError(std::string("'") + key + "' holds a non-id");
    out.push_back(v.get<TokenId>());
  }
  return out;
}

json parse(std::string_view text) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw FormatError(std::string("malformed JSON: ") + e.what());
  }
}

json pair_json(const TokenPair& p) {
  return {{"positive", token_json(p.positive)},
          {"negative", token_json(p.negative)},
          {"category", p.category}};
}

TokenPair pair_from(const json& j) {
  TokenPair p{token_from(field(j, "positive")), token_from(field(j, "negative")),
              get_as<std::string>(j, "category")};
  validate_pair(p);
  return p;
}

}  // namespace

json pair_list_to_json(const std::vector<TokenPair>& pairs) {
  json list = json::array();
  for (const auto& p : pairs) list.push_back(pair_json(p));
  return {{"version", kPairListFormatVersion}, {"pairs", list}};
}

std::vector<TokenPair> pair_list_from_json(const json& doc) {
  check_version(doc, kPairListFormatVersion);
  const json& list = field(doc, "pairs");
  if (!list.is_array()) throw FormatError("'pairs' must be an array");
  std::vector<TokenPair> out;
  try {
    for (const auto& j : list) out.push_back(pair_from(j));
  } catch (const InvalidArgument& e) {
    throw FormatError(std::string("invalid pair: ") + e.what());
  }
  return out;
}

json to_json(const FingerprintSet& set) {
  const ConstructionMeta& meta = set.meta();
  json entries = json::array();
  for (const auto& e : set.entries()) {
    entries.push_back(json{
        {"pair", pair_json(e.pair)},
        {"suffix", e.prompt.suffix},
        {"reference_bit", e.reference_bit},
        {"final_loss", e.final_loss},
    });
  }
  return json{
      {"version", kFingerprintFormatVersion},
      {"model_id", meta.model_id},
      {"base_instruction", set.base_instruction()},
      {"base_instruction_text", set.base_instruction_text()},
      {"alpha", meta.alpha},
      {"beta", meta.beta},
      {"iterations", meta.iterations},
      {"seed", meta.seed},
      {"entries", std::move(entries)},
  };
}

FingerprintSet fingerprint_set_from_json(const json& doc) {
  check_version(doc, kFingerprintFormatVersion);
  ConstructionMeta meta;
  meta.model_id = get_as<std::string>(doc, "model_id");
  meta.alpha = get_as<double>(doc, "alpha");
  meta.beta = get_as<double>(doc, "beta");
  meta.iterations = get_as<std::size_t>(doc, "iterations");
  meta.seed = get_as<std::uint64_t>(doc, "seed");
  const TokenSequence base = ids_from(doc, "base_instruction");
  const std::string base_text = get_as<std::string>(doc, "base_instruction_text");

  const json& arr = field(doc, "entries");
  if (!arr.is_array()) throw FormatError("'entries' must be an array");
  if (arr.empty()) throw FormatError("'entries' must not be empty");
  std::vector<FingerprintEntry> entries;
  entries.reserve(arr.size());
  for (const auto& je : arr) {
    FingerprintEntry e;
    const json& jp = field(je, "pair");
    e.pair.positive = token_from(field(jp, "positive"));
    e.pair.negative = token_from(field(jp, "negative"));
    e.pair.category = get_as<std::string>(jp, "category");
    e.prompt.base_instruction = base;
    e.prompt.suffix = ids_from(je, "suffix");
    const json& bit = field(je, "reference_bit");
    if (!bit.is_number_integer() || (bit.get<int>() != 0 && bit.get<int>() != 1)) {
      throw FormatError("reference_bit must be 0 or 1, got " + bit.dump());
    }
    e.reference_bit = static_cast<std::uint8_t>(bit.get<int>());
    e.final_loss = get_as<double>(je, "final_loss");
    e.meta = meta;
    entries.push_back(std::move(e));
  }
  try {
    return FingerprintSet(std::move(entries), base_text);
  } catch (const InvalidArgument& e) {
    throw FormatError(std::string("fingerprint invariant violated: ") + e.what());
  }
}

json to_json(const CalibrationModel& model) {
  return json{
      {"version", kCalibrationFormatVersion},
      {"mu", model.mu()},
      {"sigma", model.sigma()},
      {"k", model.k()},
      {"z", model.z()},
      {"tau", model.tau()},
      {"mode", model.mode()},
      {"validation_accuracies", model.validation_accuracies()},
  };
}

CalibrationModel calibration_from_json(const json& doc) {
  check_version(doc, kCalibrationFormatVersion);
  std::string mode;
  if (doc.contains("mode")) mode = get_as<std::string>(doc, "mode");
  try {
    return CalibrationModel::restore(get_as<double>(doc, "mu"), get_as<double>(doc, "sigma"),
                                     get_as<std::size_t>(doc, "k"), get_as<double>(doc, "z"),
                                     get_as<double>(doc, "tau"),
                                     get_as<std::vector<double>>(doc, "validation_accuracies"),
                                     std::move(mode));
  } catch (const InvalidArgument& e) {
    throw FormatError(std::string("calibration invariant violated: ") + e.what());
  }
}

std::string dump_canonical(const json& doc) { return doc.dump(2) + "\n"; }

std::string serialize(const FingerprintSet& set) { return dump_canonical(to_json(set)); }
std::string serialize(const CalibrationModel& model) { return dump_canonical(to_json(model)); }

FingerprintSet deserialize_fingerprints(std::string_view text) {
  return fingerprint_set_from_json(parse(text));
}

CalibrationModel deserialize_calibration(std::string_view text) {
  return calibration_from_json(parse(text));
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open '" + path.string() + "' for reading");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::filesystem::path& path, std::string_view text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot open '" + path.string() + "' for writing");
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) throw Error("failed writing '" + path.string() + "'");
}

}  // namespace llmprint
