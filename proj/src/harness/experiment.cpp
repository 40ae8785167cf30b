#include "llmprint/harness/experiment.hpp"

#include <algorithm>
#include <filesystem>

#include "llmprint/construct/builder.hpp"
#include "llmprint/core/parallel.hpp"
#include "llmprint/core/serialize.hpp"
#include "llmprint/harness/report.hpp"
#include "llmprint/pairs/catalog.hpp"
#include "llmprint/pairs/sampler.hpp"

namespace llmprint::harness {
namespace {

/// Bits of every model for one fingerprint set and one verify config.
struct Evaluation {
  BitString reference;
  std::vector<BitString> validation;
  std::vector<std::optional<BitString>> suspects;
  std::vector<std::string> errors;
};

BitString prefix(const BitString& bits, std::size_t n) {
  const auto all = bits.bits();
  return BitString(std::vector<std::uint8_t>(all.begin(), all.begin() + std::min(n, all.size())));
}

struct Models {
  std::shared_ptr<const Vocabulary> vocab;
  std::unique_ptr<ToyBackend> base;
  std::vector<std::unique_ptr<ToyBackend>> validation;
  std::vector<Suspect> suspects;
  std::vector<std::unique_ptr<ToyBackend>> suspect_backends;
};

Evaluation evaluate(const Models& m, const FingerprintSet& set, verify::VerifyConfig config,
                    std::size_t workers) {
  config.workers = 1;
  Evaluation e;
  e.reference = verify::reference_bits(*m.base, set);
  const std::size_t k = m.validation.size();
  const std::size_t total = k + m.suspect_backends.size();
  std::vector<std::optional<BitString>> bits(total);
  std::vector<std::string> errors(total);
  parallel_for(total, workers, [&](std::size_t i) {
    const ModelBackend& backend = i < k ? *m.validation[i] : *m.suspect_backends[i - k];
    if (i < k) {
      bits[i] = verify::suspect_bits(backend, set, config).bits;
      return;
    }
    try {
      bits[i] = verify::suspect_bits(backend, set, config).bits;
    } catch (const std::exception& ex) {
      errors[i] = ex.what();
    }
  });
  for (std::size_t i = 0; i < k; ++i) e.validation.push_back(std::move(*bits[i]));
  for (std::size_t i = k; i < total; ++i) {
    e.suspects.push_back(std::move(bits[i]));
    e.errors.push_back(std::move(errors[i]));
  }
  return e;
}

/// Calibration and verdicts on the first n entries.
ModeResult score(const Models& m, const Evaluation& e, const verify::VerifyConfig& config,
                 std::size_t n, double z) {
  const BitString ref = prefix(e.reference, n);
  std::vector<double> accuracies;
  accuracies.reserve(e.validation.size());
  for (const auto& v : e.validation) accuracies.push_back(bitwise_accuracy(ref, prefix(v, n)));
  ModeResult r{config, CalibrationModel::fit(std::move(accuracies), z, verify::to_string(config.mode)),
               {}, {}};
  r.config.z = z;
  for (std::size_t i = 0; i < m.suspects.size(); ++i) {
    const Suspect& s = m.suspects[i];
    SuspectOutcome o{s.name, s.kind, s.positive, 0.0, r.calibration.tau(), false, e.errors[i]};
    if (e.suspects[i]) {
      const Verdict v = decide(bitwise_accuracy(ref, prefix(*e.suspects[i], n)), r.calibration);
      o.accuracy = v.accuracy;
      o.detected = v.positive();
    }
    r.suspects.push_back(std::move(o));
  }
  r.rates = aggregate(r.suspects);
  return r;
}

SweepPoint point(const std::string& axis, double value, const ModeResult& r) {
  return {axis, value, r.config.mode, r.calibration.tau(), r.rates};
}

void write_outputs(const ExperimentConfig& config, const DetectionReport& report,
                   const FingerprintSet& set) {
  const std::filesystem::path dir(config.output_dir);
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error("cannot create output directory '" + dir.string() + "': " + ec.message());
  write_text_file(dir / "fingerprints.json", serialize(set));
  emit_report(report, ReportFormat::kJson, dir / "report.json");
  emit_report(report, ReportFormat::kCsv, dir / "report.csv");
  emit_report(report, ReportFormat::kMarkdown, dir / "report.md");
}

}  // namespace

double Rates::tpr() const {
  return positives == 0 ? 0.0 : static_cast<double>(detected_positives) / static_cast<double>(positives);
}

double Rates::fpr() const {
  return negatives == 0 ? 0.0 : static_cast<double>(detected_negatives) / static_cast<double>(negatives);
}

FamilyRates aggregate(std::vector<SuspectOutcome> outcomes) {
  std::sort(outcomes.begin(), outcomes.end(),
            [](const SuspectOutcome& a, const SuspectOutcome& b) { return a.name < b.name; });
  FamilyRates r;
  for (const auto& o : outcomes) {
    if (!o.positive) {
      for (Rates* rates : {&r.post_training, &r.quantization, &r.overall}) {
        ++rates->negatives;
        rates->detected_negatives += o.detected ? 1 : 0;
      }
      continue;
    }
    Rates& family = o.kind == FamilyKind::kQuantization ? r.quantization : r.post_training;
    for (Rates* rates : {&family, &r.overall}) {
      ++rates->positives;
      rates->detected_positives += o.detected ? 1 : 0;
    }
  }
  return r;
}

ExperimentWorld make_world(const ExperimentConfig& config) {
  ExperimentWorld w;
  w.vocab = pairs::make_toy_vocabulary();
  w.architecture = config.architecture.resolve(*w.vocab);
  w.base = std::make_shared<const ToyLM>(ToyLM::init(w.architecture, config.base_seed));
  return w;
}

FingerprintSet build_experiment_fingerprints(const ExperimentWorld& world,
                                             const ExperimentConfig& config,
                                             const construct::ConstructionConfig& construction,
                                             std::size_t count, FingerprintSummary* summary) {
  const auto pairs =
      pairs::sample_token_pairs(pairs::CategoryCatalog::standard(), *world.vocab, count, config.pair_seed);
  const ToyBackend base(world.base, world.vocab);
  const auto instruction = world.vocab->tokenize(config.resolved_instruction());
  auto result = construct::build_fingerprints(base, pairs, instruction, construction,
                                              resolve_workers(config.workers));
  if (!result.set) {
    throw Error("fingerprint construction failed for every pair" +
                (result.failures.empty() ? std::string() : ": " + result.failures.front().message));
  }
  if (summary != nullptr) {
    summary->count = result.set->size();
    summary->failures = result.failures.size();
    double total = 0.0;
    for (std::size_t j = 0; j < result.set->size(); ++j) total += (*result.set)[j].final_loss;
    summary->mean_final_loss = total / static_cast<double>(result.set->size());
  }
  return std::move(*result.set);
}

DetectionReport run_experiment(const ExperimentConfig& config,
                               const std::optional<FingerprintSet>& prebuilt,
                               const Progress& progress) {
  config.validate();
  auto say = [&](const std::string& s) {
    if (progress) progress(s);
  };
  const std::size_t workers = resolve_workers(config.workers);
  const ExperimentWorld world = make_world(config);

  DetectionReport report;
  report.config = to_json(config);

  FingerprintSet set = [&] {
    if (prebuilt) {
      if (prebuilt->size() < config.constructed_count()) {
        throw InvalidArgument("prebuilt fingerprint set holds " + std::to_string(prebuilt->size()) +
                              " entries, the experiment needs " +
                              std::to_string(config.constructed_count()));
      }
      report.fingerprints.count = prebuilt->size();
      double total = 0.0;
      for (std::size_t j = 0; j < prebuilt->size(); ++j) total += (*prebuilt)[j].final_loss;
      report.fingerprints.mean_final_loss = total / static_cast<double>(prebuilt->size());
      return *prebuilt;
    }
    say("constructing " + std::to_string(config.constructed_count()) + " fingerprints");
    return build_experiment_fingerprints(world, config, config.construction,
                                         config.constructed_count(), &report.fingerprints);
  }();
  const std::size_t n = std::min(config.n, set.size());

  Models m;
  m.vocab = world.vocab;
  m.base = std::make_unique<ToyBackend>(world.base, world.vocab);
  for (const auto& v : make_independent_models(world.architecture, config.validation_seeds)) {
    m.validation.push_back(std::make_unique<ToyBackend>(v, world.vocab));
  }
  m.suspects = make_suspect_family(*world.base, config.family);
  for (const auto& s : m.suspects) m.suspect_backends.push_back(std::make_unique<ToyBackend>(s.model, world.vocab));

  for (const auto& mode : config.modes) {
    say("verifying in " + verify::to_string(mode.mode) + " mode");
    const Evaluation e = evaluate(m, set, mode, workers);
    report.modes.push_back(score(m, e, mode, n, mode.z));
    for (auto v : config.sweeps.n) report.sweeps.push_back(point("n", static_cast<double>(v), score(m, e, mode, v, mode.z)));
    for (auto z : config.sweeps.z) report.sweeps.push_back(point("z", z, score(m, e, mode, n, z)));
    if (mode.mode == verify::Mode::kBlackBox) {
      for (auto t : config.sweeps.samples) {
        say("black-box sweep T = " + std::to_string(t));
        auto cfg = mode;
        cfg.samples = t;
        report.sweeps.push_back(point("T", static_cast<double>(t), score(m, evaluate(m, set, cfg, workers), cfg, n, cfg.z)));
      }
    }
  }

  auto rebuild_sweep = [&](const std::string& axis, const std::vector<double>& values, auto apply) {
    for (double v : values) {
      say(axis + " sweep: rebuilding fingerprints at " + std::to_string(v));
      auto construction = config.construction;
      apply(construction, v);
      const FingerprintSet swept = build_experiment_fingerprints(world, config, construction, n, nullptr);
      for (const auto& mode : config.modes) {
        report.sweeps.push_back(point(axis, v, score(m, evaluate(m, swept, mode, workers), mode, n, mode.z)));
      }
    }
  };
  rebuild_sweep("alpha", config.sweeps.alpha, [](construct::ConstructionConfig& c, double v) { c.alpha = v; });
  rebuild_sweep("beta", config.sweeps.beta, [](construct::ConstructionConfig& c, double v) { c.beta = v; });

  if (!config.output_dir.empty()) write_outputs(config, report, set);
  return report;
}

}  // namespace llmprint::harness
