#include "llmprint/harness/report.hpp"

#include <cstdio>
#include <map>
#include <sstream>

#include "llmprint/core/serialize.hpp"

namespace llmprint::harness {
namespace {

using nlohmann::json;

constexpr int kReportVersion = 1;

const char* const kColumns[] = {"record",     "index",     "mode",      "axis",
                                "value",      "family",    "name",      "kind",
                                "positive",   "accuracy",  "threshold", "detected",
                                "tau",        "positives", "detected_positives",
                                "negatives",  "detected_negatives",     "tpr",
                                "fpr",        "payload"};
constexpr std::size_t kColumnCount = sizeof kColumns / sizeof kColumns[0];

json to_json(const Rates& r) {
  return {{"positives", r.positives},
          {"detected_positives", r.detected_positives},
          {"negatives", r.negatives},
          {"detected_negatives", r.detected_negatives},
          {"tpr", r.tpr()},
          {"fpr", r.fpr()}};
}

Rates rates_from_json(const json& j) {
  Rates r;
  r.positives = j.at("positives").get<std::size_t>();
  r.detected_positives = j.at("detected_positives").get<std::size_t>();
  r.negatives = j.at("negatives").get<std::size_t>();
  r.detected_negatives = j.at("detected_negatives").get<std::size_t>();
  return r;
}

json to_json(const FamilyRates& r) {
  return {{"post_training", to_json(r.post_training)},
          {"quantization", to_json(r.quantization)},
          {"overall", to_json(r.overall)}};
}

FamilyRates family_rates_from_json(const json& j) {
  return {rates_from_json(j.at("post_training")), rates_from_json(j.at("quantization")),
          rates_from_json(j.at("overall"))};
}

std::string number(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string quote(const std::string& field) {
  if (field.find_first_of(",\"\n\r") == std::string::npos) return field;
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::vector<std::vector<std::string>> parse_csv(const std::string& text) {
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> row;
  std::string field;
  bool quoted = false;
  bool any = false;
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        field += c;
      }
      continue;
    }
    if (c == '"') {
      quoted = true;
      any = true;
    } else if (c == ',') {
      row.push_back(std::move(field));
      field.clear();
      any = true;
    } else if (c == '\n' || c == '\r') {
      if (c == '\r' && i + 1 < text.size() && text[i + 1] == '\n') ++i;
      if (any || !field.empty()) {
        row.push_back(std::move(field));
        rows.push_back(std::move(row));
      }
      row.clear();
      field.clear();
      any = false;
    } else {
      field += c;
      any = true;
    }
  }
  if (quoted) throw FormatError("unterminated quoted CSV field");
  if (any || !field.empty()) {
    row.push_back(std::move(field));
    rows.push_back(std::move(row));
  }
  return rows;
}

class CsvWriter {
 public:
  CsvWriter() {
    for (std::size_t i = 0; i < kColumnCount; ++i) out_ << (i ? "," : "") << kColumns[i];
    out_ << "\n";
  }
  void row(const std::map<std::string, std::string>& cells) {
    for (std::size_t i = 0; i < kColumnCount; ++i) {
      const auto it = cells.find(kColumns[i]);
      out_ << (i ? "," : "") << (it == cells.end() ? "" : quote(it->second));
    }
    out_ << "\n";
  }
  std::string str() const { return out_.str(); }

 private:
  std::ostringstream out_;
};

void rate_cells(std::map<std::string, std::string>& cells, const Rates& r) {
  cells["positives"] = std::to_string(r.positives);
  cells["detected_positives"] = std::to_string(r.detected_positives);
  cells["negatives"] = std::to_string(r.negatives);
  cells["detected_negatives"] = std::to_string(r.detected_negatives);
  cells["tpr"] = number(r.tpr());
  cells["fpr"] = number(r.fpr());
}

std::string fixed3(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3f", v);
  return buf;
}

const ModeResult* first_mode(const DetectionReport& r, std::initializer_list<verify::Mode> prefs) {
  for (auto p : prefs) {
    for (const auto& m : r.modes) {
      if (m.config.mode == p) return &m;
    }
  }
  return nullptr;
}

std::string rate_pair(const ModeResult* m, const Rates FamilyRates::*family) {
  if (m == nullptr) return " n/a | n/a |";
  const Rates& r = m->rates.*family;
  return " " + fixed3(r.tpr()) + " | " + fixed3(r.fpr()) + " |";
}

}  // namespace

ReportFormat parse_report_format(const std::string& text) {
  if (text == "json") return ReportFormat::kJson;
  if (text == "csv") return ReportFormat::kCsv;
  if (text == "markdown" || text == "md") return ReportFormat::kMarkdown;
  throw InvalidArgument("unknown report format '" + text + "'");
}

json to_json(const DetectionReport& report) {
  json modes = json::array();
  for (const auto& m : report.modes) {
    json suspects = json::array();
    for (const auto& s : m.suspects) {
      suspects.push_back({{"name", s.name},
                          {"kind", to_string(s.kind)},
                          {"positive", s.positive},
                          {"accuracy", s.accuracy},
                          {"threshold", s.threshold},
                          {"detected", s.detected},
                          {"error", s.error}});
    }
    modes.push_back({{"verify", to_json(m.config)},
                     {"calibration", to_json(m.calibration)},
                     {"rates", to_json(m.rates)},
                     {"suspects", suspects}});
  }
  json sweeps = json::array();
  for (const auto& s : report.sweeps) {
    sweeps.push_back({{"axis", s.axis},
                      {"value", s.value},
                      {"mode", verify::to_string(s.mode)},
                      {"tau", s.tau},
                      {"rates", to_json(s.rates)}});
  }
  return {{"version", kReportVersion},
          {"config", report.config},
          {"fingerprints",
           {{"count", report.fingerprints.count},
            {"failures", report.fingerprints.failures},
            {"mean_final_loss", report.fingerprints.mean_final_loss}}},
          {"modes", modes},
          {"sweeps", sweeps}};
}

DetectionReport report_from_json(const json& doc) {
  try {
    if (doc.at("version").get<int>() != kReportVersion) {
      throw FormatError("unsupported report version " + doc.at("version").dump());
    }
    DetectionReport r;
    r.config = doc.at("config");
    const auto& f = doc.at("fingerprints");
    r.fingerprints = {f.at("count").get<std::size_t>(), f.at("failures").get<std::size_t>(),
                      f.at("mean_final_loss").get<double>()};
    for (const auto& m : doc.at("modes")) {
      ModeResult mode{verify_config_from_json(m.at("verify")),
                      calibration_from_json(m.at("calibration")),
                      {},
                      family_rates_from_json(m.at("rates"))};
      for (const auto& s : m.at("suspects")) {
        mode.suspects.push_back({s.at("name").get<std::string>(),
                                 parse_family_kind(s.at("kind").get<std::string>()),
                                 s.at("positive").get<bool>(), s.at("accuracy").get<double>(),
                                 s.at("threshold").get<double>(), s.at("detected").get<bool>(),
                                 s.at("error").get<std::string>()});
      }
      r.modes.push_back(std::move(mode));
    }
    for (const auto& s : doc.at("sweeps")) {
      r.sweeps.push_back({s.at("axis").get<std::string>(), s.at("value").get<double>(),
                          verify::parse_mode(s.at("mode").get<std::string>()),
                          s.at("tau").get<double>(), family_rates_from_json(s.at("rates"))});
    }
    return r;
  } catch (const json::exception& e) {
    throw FormatError(std::string("malformed report: ") + e.what());
  } catch (const InvalidArgument& e) {
    throw FormatError(std::string("malformed report: ") + e.what());
  }
}

std::string to_csv(const DetectionReport& report) {
  CsvWriter w;
  w.row({{"record", "config"}, {"payload", report.config.dump()}});
  w.row({{"record", "fingerprints"},
         {"payload", json({{"count", report.fingerprints.count},
                           {"failures", report.fingerprints.failures},
                           {"mean_final_loss", report.fingerprints.mean_final_loss}})
                         .dump()}});
  const std::pair<const char*, const Rates FamilyRates::*> families[] = {
      {"post_training", &FamilyRates::post_training},
      {"quantization", &FamilyRates::quantization},
      {"overall", &FamilyRates::overall}};
  for (std::size_t i = 0; i < report.modes.size(); ++i) {
    const auto& m = report.modes[i];
    const std::string index = std::to_string(i);
    const std::string mode = verify::to_string(m.config.mode);
    w.row({{"record", "mode"},
           {"index", index},
           {"mode", mode},
           {"tau", number(m.calibration.tau())},
           {"payload", json({{"verify", to_json(m.config)}, {"calibration", to_json(m.calibration)}}).dump()}});
    for (const auto& [family, member] : families) {
      std::map<std::string, std::string> cells{
          {"record", "rate"}, {"index", index}, {"mode", mode}, {"family", family}};
      rate_cells(cells, m.rates.*member);
      w.row(cells);
    }
    for (const auto& s : m.suspects) {
      w.row({{"record", "suspect"},
             {"index", index},
             {"mode", mode},
             {"name", s.name},
             {"kind", to_string(s.kind)},
             {"positive", s.positive ? "1" : "0"},
             {"accuracy", number(s.accuracy)},
             {"threshold", number(s.threshold)},
             {"detected", s.detected ? "1" : "0"},
             {"payload", s.error}});
    }
  }
  for (std::size_t i = 0; i < report.sweeps.size(); ++i) {
    const auto& s = report.sweeps[i];
    for (const auto& [family, member] : families) {
      std::map<std::string, std::string> cells{{"record", "sweep"},
                                               {"index", std::to_string(i)},
                                               {"mode", verify::to_string(s.mode)},
                                               {"axis", s.axis},
                                               {"value", number(s.value)},
                                               {"tau", number(s.tau)},
                                               {"family", family}};
      rate_cells(cells, s.rates.*member);
      w.row(cells);
    }
  }
  return w.str();
}

DetectionReport report_from_csv(const std::string& text) {
  const auto rows = parse_csv(text);
  if (rows.empty()) throw FormatError("empty CSV report");
  std::map<std::string, std::size_t> col;
  for (std::size_t i = 0; i < rows[0].size(); ++i) col[rows[0][i]] = i;
  for (const char* c : kColumns) {
    if (!col.count(c)) throw FormatError(std::string("CSV report lacks column '") + c + "'");
  }
  DetectionReport r;
  std::map<std::size_t, SweepPoint> sweeps;
  try {
    for (std::size_t ri = 1; ri < rows.size(); ++ri) {
      const auto& row = rows[ri];
      if (row.size() != rows[0].size()) {
        throw FormatError("CSV row " + std::to_string(ri + 1) + " has " + std::to_string(row.size()) +
                          " fields");
      }
      auto get = [&](const char* name) -> const std::string& { return row[col.at(name)]; };
      auto num = [&](const char* name) { return std::stod(get(name)); };
      auto count = [&](const char* name) { return static_cast<std::size_t>(std::stoull(get(name))); };
      auto rates = [&] {
        return Rates{count("positives"), count("detected_positives"), count("negatives"),
                     count("detected_negatives")};
      };
      auto family_slot = [&](FamilyRates& fr) -> Rates& {
        const std::string& f = get("family");
        if (f == "post_training") return fr.post_training;
        if (f == "quantization") return fr.quantization;
        if (f == "overall") return fr.overall;
        throw FormatError("unknown rate family '" + f + "'");
      };
      const std::string& record = get("record");
      if (record == "config") {
        r.config = json::parse(get("payload"));
      } else if (record == "fingerprints") {
        const auto f = json::parse(get("payload"));
        r.fingerprints = {f.at("count").get<std::size_t>(), f.at("failures").get<std::size_t>(),
                          f.at("mean_final_loss").get<double>()};
      } else if (record == "mode") {
        if (count("index") != r.modes.size()) throw FormatError("CSV mode records out of order");
        const auto p = json::parse(get("payload"));
        r.modes.push_back({verify_config_from_json(p.at("verify")),
                           calibration_from_json(p.at("calibration")), {}, {}});
      } else if (record == "rate") {
        const std::size_t i = count("index");
        if (i >= r.modes.size()) throw FormatError("CSV rate row before its mode row");
        family_slot(r.modes[i].rates) = rates();
      } else if (record == "suspect") {
        const std::size_t i = count("index");
        if (i >= r.modes.size()) throw FormatError("CSV suspect row before its mode row");
        r.modes[i].suspects.push_back({get("name"), parse_family_kind(get("kind")),
                                       get("positive") == "1", num("accuracy"), num("threshold"),
                                       get("detected") == "1", get("payload")});
      } else if (record == "sweep") {
        SweepPoint& s = sweeps[count("index")];
        s.axis = get("axis");
        s.value = num("value");
        s.mode = verify::parse_mode(get("mode"));
        s.tau = num("tau");
        family_slot(s.rates) = rates();
      } else {
        throw FormatError("unknown CSV record '" + record + "'");
      }
    }
  } catch (const json::exception& e) {
    throw FormatError(std::string("malformed CSV payload: ") + e.what());
  } catch (const std::invalid_argument&) {
    throw FormatError("malformed number in CSV report");
  } catch (const std::out_of_range&) {
    throw FormatError("number out of range in CSV report");
  }
  for (auto& [i, s] : sweeps) {
    if (i != r.sweeps.size()) throw FormatError("CSV sweep indices are not contiguous");
    r.sweeps.push_back(std::move(s));
  }
  return r;
}

std::string to_markdown(const DetectionReport& report) {
  std::ostringstream out;
  out << "# Detection report\n\n";
  out << "Fingerprints: " << report.fingerprints.count << " (" << report.fingerprints.failures
      << " failed), mean final loss " << fixed3(report.fingerprints.mean_final_loss) << "\n\n";

  const ModeResult* gray = first_mode(report, {verify::Mode::kGrayFull, verify::Mode::kGrayTopK});
  const ModeResult* black = first_mode(report, {verify::Mode::kBlackBox});
  out << "## Detection by suspect family\n\n";
  out << "| Family | Gray-box TPR | Gray-box FPR | Black-box TPR | Black-box FPR |\n";
  out << "|---|---|---|---|---|\n";
  out << "| Post-training |" << rate_pair(gray, &FamilyRates::post_training)
      << rate_pair(black, &FamilyRates::post_training) << "\n";
  out << "| Quantization |" << rate_pair(gray, &FamilyRates::quantization)
      << rate_pair(black, &FamilyRates::quantization) << "\n\n";

  out << "## Detection by verification mode\n\n";
  out << "| Mode | Post-training TPR | Post-training FPR | Quantization TPR | Quantization FPR |\n";
  out << "|---|---|---|---|---|\n";
  for (const auto& m : report.modes) {
    out << "| " << verify::to_string(m.config.mode) << " |" << rate_pair(&m, &FamilyRates::post_training)
        << rate_pair(&m, &FamilyRates::quantization) << "\n";
  }
  out << "\n## Calibration\n\n";
  out << "| Mode | k | mu | sigma | z | tau |\n|---|---|---|---|---|---|\n";
  for (const auto& m : report.modes) {
    const auto& c = m.calibration;
    out << "| " << verify::to_string(m.config.mode) << " | " << c.k() << " | " << fixed3(c.mu())
        << " | " << fixed3(c.sigma()) << " | " << c.z() << " | " << fixed3(c.tau()) << " |\n";
  }
  if (!report.sweeps.empty()) {
    out << "\n## Sweeps\n\n";
    out << "| Axis | Value | Mode | TPR | FPR | tau |\n|---|---|---|---|---|---|\n";
    for (const auto& s : report.sweeps) {
      char value[32];
      std::snprintf(value, sizeof value, "%g", s.value);
      out << "| " << s.axis << " | " << value << " | " << verify::to_string(s.mode) << " | "
          << fixed3(s.rates.overall.tpr()) << " | " << fixed3(s.rates.overall.fpr()) << " | "
          << fixed3(s.tau) << " |\n";
    }
  }
  return out.str();
}

std::string render(const DetectionReport& report, ReportFormat format) {
  switch (format) {
    case ReportFormat::kJson: return dump_canonical(to_json(report));
    case ReportFormat::kCsv: return to_csv(report);
    case ReportFormat::kMarkdown: return to_markdown(report);
  }
  return {};
}

void emit_report(const DetectionReport& report, ReportFormat format,
                 const std::filesystem::path& path) {
  write_text_file(path, render(report, format));
}

}  // namespace llmprint::harness
