#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <set>
#include <sstream>

#include "llmprint/backend/derive.hpp"
#include "llmprint/core/serialize.hpp"
#include "llmprint/harness/experiment.hpp"
#include "llmprint/harness/family.hpp"
#include "llmprint/harness/report.hpp"
#include "llmprint/pairs/catalog.hpp"

using namespace llmprint;
using namespace llmprint::harness;

namespace {

ExperimentConfig tiny_experiment() {
  ExperimentConfig c;
  c.architecture.hidden_width = 16;
  c.family.bits = {8};
  c.family.sigmas = {0.01};
  c.family.perturbation_seeds = {1};
  c.family.negative_seeds = {1001, 1002, 1003};
  c.validation_seeds = {2001, 2002, 2003};
  c.n = 12;
  c.construction.suffix_length = 5;
  c.construction.iterations = 2;
  c.construction.batch_size = 8;
  c.workers = 2;
  for (auto& m : c.modes) m.samples = 20;
  c.sweeps.n = {6, 16};
  c.sweeps.z = {0.0};
  c.sweeps.samples = {5};
  return c;
}

const DetectionReport& tiny_report() {
  static const DetectionReport report = run_experiment(tiny_experiment());
  return report;
}

void check_same(const Rates& a, const Rates& b) { CHECK(a == b); }

void check_same(const DetectionReport& a, const DetectionReport& b) {
  CHECK(a.config == b.config);
  CHECK(a.fingerprints.count == b.fingerprints.count);
  CHECK(std::abs(a.fingerprints.mean_final_loss - b.fingerprints.mean_final_loss) <= 1e-12);
  REQUIRE(a.modes.size() == b.modes.size());
  for (std::size_t i = 0; i < a.modes.size(); ++i) {
    const auto& x = a.modes[i];
    const auto& y = b.modes[i];
    CHECK(x.calibration == y.calibration);
    check_same(x.rates.overall, y.rates.overall);
    check_same(x.rates.quantization, y.rates.quantization);
    check_same(x.rates.post_training, y.rates.post_training);
    REQUIRE(x.suspects.size() == y.suspects.size());
    for (std::size_t j = 0; j < x.suspects.size(); ++j) {
      CHECK(x.suspects[j].name == y.suspects[j].name);
      CHECK(std::abs(x.suspects[j].accuracy - y.suspects[j].accuracy) <= 1e-12);
      CHECK(std::abs(x.suspects[j].threshold - y.suspects[j].threshold) <= 1e-12);
      CHECK(x.suspects[j].detected == y.suspects[j].detected);
      CHECK(x.suspects[j].kind == y.suspects[j].kind);
    }
  }
  REQUIRE(a.sweeps.size() == b.sweeps.size());
  for (std::size_t i = 0; i < a.sweeps.size(); ++i) {
    CHECK(a.sweeps[i].axis == b.sweeps[i].axis);
    CHECK(std::abs(a.sweeps[i].value - b.sweeps[i].value) <= 1e-12);
    CHECK(std::abs(a.sweeps[i].tau - b.sweeps[i].tau) <= 1e-12);
    check_same(a.sweeps[i].rates.overall, b.sweeps[i].rates.overall);
  }
}

}  // namespace

TEST_CASE("suspect family contract") {
  const auto vocab = pairs::make_toy_vocabulary();
  const ToyConfig arch = Architecture{}.resolve(*vocab);
  const ToyLM base = ToyLM::init(arch, 1);
  SUBCASE("empty spec") {
    CHECK(make_suspect_family(base, FamilySpec{{}, {}, {}, {}}).empty());
  }
  SUBCASE("one quantized copy and three negatives") {
    const auto family = make_suspect_family(base, FamilySpec{{8}, {}, {}, {11, 12, 13}});
    REQUIRE(family.size() == 4);
    CHECK(family[0].positive);
    CHECK(family[0].kind == FamilyKind::kQuantization);
    CHECK(*family[0].model == quantize_weights(base, 8));
    for (std::size_t i = 1; i < 4; ++i) {
      CHECK_FALSE(family[i].positive);
      CHECK(family[i].kind == FamilyKind::kNegative);
    }
    CHECK(family[3].model->seed() == 13);
  }
  SUBCASE("default family has 20 positives and 20 negatives") {
    const auto family = make_suspect_family(base, FamilySpec{});
    std::size_t positives = 0, post = 0;
    std::set<std::string> names;
    for (const auto& s : family) {
      positives += s.positive;
      post += s.kind == FamilyKind::kPostTraining;
      names.insert(s.name);
    }
    CHECK(positives == 20);
    CHECK(post == 15);
    CHECK(family.size() - positives == 20);
    CHECK(names.size() == family.size());
  }
  SUBCASE("negatives differ from the base on some probe prompt") {
    const ToyBackend b(std::make_shared<const ToyLM>(base), vocab);
    const auto words = vocab->ordinary_ids();
    for (const auto& neg : make_independent_models(arch, FamilySpec{}.negative_seeds)) {
      const ToyBackend n(neg, vocab);
      bool differs = false;
      for (std::size_t p = 0; p < 20 && !differs; ++p) {
        const TokenSequence probe{words[(7 * p) % words.size()], words[(13 * p + 5) % words.size()]};
        differs = b.first_token_logits(probe).argmax() != n.first_token_logits(probe).argmax();
      }
      CHECK(differs);
    }
  }
}

TEST_CASE("experiment config validation and JSON") {
  ExperimentConfig c;
  CHECK_NOTHROW(c.validate());
  c.validation_seeds.push_back(c.family.negative_seeds.front());
  CHECK_THROWS_AS(c.validate(), InvalidArgument);
  c = ExperimentConfig{};
  c.validation_seeds.push_back(c.base_seed);
  CHECK_THROWS_AS(c.validate(), InvalidArgument);

  c = tiny_experiment();
  const auto j = to_json(c);
  CHECK(to_json(experiment_config_from_json(j)) == j);
  auto bad = j;
  bad["colour"] = "red";
  CHECK_THROWS_AS(experiment_config_from_json(bad), Error);
  const auto partial = experiment_config_from_json({{"n", 50}});
  CHECK(partial.n == 50);
  CHECK(partial.validation_seeds.size() == 13);
  CHECK(partial.construction.iterations == desk_construction().iterations);
}

TEST_CASE("rates aggregate by ground truth") {
  std::vector<SuspectOutcome> outcomes{
      {"b", FamilyKind::kQuantization, true, 0.9, 0.6, true, ""},
      {"a", FamilyKind::kPostTraining, true, 0.5, 0.6, false, ""},
      {"c", FamilyKind::kNegative, false, 0.7, 0.6, true, ""},
      {"d", FamilyKind::kNegative, false, 0.4, 0.6, false, ""},
      {"e", FamilyKind::kPostTraining, true, 0.0, 0.6, false, "timeout"}};
  const auto r = aggregate(outcomes);
  CHECK(r.overall.positives == 3);
  CHECK(r.overall.detected_positives == 1);
  CHECK(r.overall.tpr() == doctest::Approx(1.0 / 3.0));
  CHECK(r.overall.fpr() == 0.5);
  CHECK(r.quantization.tpr() == 1.0);
  CHECK(r.post_training.tpr() == 0.0);
  CHECK(r.post_training.fpr() == 0.5);
  std::reverse(outcomes.begin(), outcomes.end());
  CHECK(aggregate(outcomes).overall == r.overall);
  CHECK(Rates{}.tpr() == 0.0);
}

TEST_CASE("small experiment end to end") {
  const auto& report = tiny_report();
  REQUIRE(report.modes.size() == 3);
  for (const auto& m : report.modes) {
    CHECK(m.suspects.size() == 5);
    CHECK(m.rates.overall.positives == 2);
    CHECK(m.rates.overall.negatives == 3);
    CHECK(m.calibration.k() == 3);
  }
  // two n points and one z point per mode, one T point for blackbox
  CHECK(report.sweeps.size() == 3 * 3 + 1);
  CHECK(report.fingerprints.count == 16);
}

TEST_CASE("identity-like suspect is detected in grayfull mode") {
  auto c = tiny_experiment();
  c.family = FamilySpec{{40}, {}, {}, {1001, 1002}};
  c.modes.resize(1);
  c.sweeps = {};
  const auto report = run_experiment(c);
  CHECK(report.modes[0].rates.overall.tpr() == 1.0);
  CHECK(report.modes[0].suspects[0].accuracy == 1.0);
}

TEST_CASE("experiments are reproducible") {
  const auto again = run_experiment(tiny_experiment());
  CHECK(dump_canonical(to_json(again)) == dump_canonical(to_json(tiny_report())));
}

TEST_CASE("report round trips") {
  const auto& report = tiny_report();
  SUBCASE("json") {
    const auto back = report_from_json(nlohmann::json::parse(render(report, ReportFormat::kJson)));
    check_same(back, report);
    CHECK(render(back, ReportFormat::kJson) == render(report, ReportFormat::kJson));
  }
  SUBCASE("json to csv to json") {
    const auto csv = to_csv(report_from_json(to_json(report)));
    const auto back = report_from_csv(csv);
    check_same(back, report);
    CHECK(to_csv(back) == csv);
  }
  SUBCASE("empty report") {
    const DetectionReport empty;
    check_same(report_from_json(to_json(empty)), empty);
    check_same(report_from_csv(to_csv(empty)), empty);
    CHECK(to_markdown(empty).find("n/a") != std::string::npos);
  }
  SUBCASE("malformed csv") {
    CHECK_THROWS_AS(report_from_csv("record,index\nconfig,0\n"), FormatError);
    CHECK_THROWS_AS(report_from_csv(to_csv(report) + "\"open"), FormatError);
  }
}

TEST_CASE("markdown layout") {
  const auto md = to_markdown(tiny_report());
  std::istringstream in(md);
  std::string line;
  std::size_t family_rows = 0;
  while (std::getline(in, line)) {
    if (line.starts_with("| Post-training |") || line.starts_with("| Quantization |")) {
      ++family_rows;
      std::size_t cells = 0, numeric = 0;
      std::istringstream row(line.substr(1));
      std::string cell;
      while (std::getline(row, cell, '|')) {
        ++cells;
        try {
          std::size_t used = 0;
          (void)std::stod(cell, &used);
          ++numeric;
        } catch (const std::exception&) {
        }
      }
      CHECK(cells == 5);
      CHECK(numeric == 4);
    }
  }
  CHECK(family_rows == 2);
  CHECK(md.find("| grayfull |") != std::string::npos);
}

TEST_CASE("reports are written to the output directory") {
  auto c = tiny_experiment();
  c.sweeps = {};
  c.modes.resize(1);
  const auto dir = std::filesystem::temp_directory_path() / "llmprint_harness_test_out";
  std::filesystem::remove_all(dir);
  c.output_dir = dir.string();
  const auto report = run_experiment(c);
  for (const char* f : {"report.json", "report.csv", "report.md", "fingerprints.json"}) {
    CHECK(std::filesystem::exists(dir / f));
  }
  const auto set = deserialize_fingerprints(read_text_file(dir / "fingerprints.json"));
  CHECK(set.size() == c.n);
  const auto rerun = run_experiment(c, set);
  CHECK(dump_canonical(to_json(rerun)) == dump_canonical(to_json(report)));
  CHECK_THROWS_AS(emit_report(report, ReportFormat::kJson, dir / "missing" / "sub" / "r.json"), Error);
  std::filesystem::remove_all(dir);
}
