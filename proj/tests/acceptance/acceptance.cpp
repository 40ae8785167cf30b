// Acceptance checks: one PASS/FAIL line per criterion, INFO lines for
// context. Exit status is nonzero when any criterion fails.
//
//   llmprint_acceptance [--fingerprints FILE] [--save-fingerprints FILE]

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <iostream>
#include <map>
#include <random>
#include <sstream>
#include <string>

#include "fixtures.hpp"
#include "llmprint/construct/builder.hpp"
#include "llmprint/construct/gcg.hpp"
#include "llmprint/construct/objective.hpp"
#include "llmprint/core/random.hpp"
#include "llmprint/core/serialize.hpp"
#include "llmprint/harness/experiment.hpp"
#include "llmprint/harness/report.hpp"
#include "llmprint/pairs/catalog.hpp"
#include "llmprint/remote/mock_server.hpp"
#include "llmprint/remote/remote_backend.hpp"
#include "llmprint/verify/verify.hpp"
#include "oracles.hpp"

using namespace llmprint;
using namespace std::chrono_literals;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

int g_failures = 0;

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

void criterion(int id, const std::string& title, const std::function<Outcome()>& body) {
  const auto t0 = std::chrono::steady_clock::now();
  Outcome o;
  try {
    o = body();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (!o.pass) ++g_failures;
  std::cout << (o.pass ? "PASS" : "FAIL") << " [" << id << "] " << title << ": " << o.detail
            << fmt(" (%.1fs)", secs) << std::endl;
}

void info(const std::string& text) { std::cout << "INFO " << text << std::endl; }

// Desk-scale state shared by criteria 4 to 7 and 9.
struct Desk {
  harness::ExperimentConfig config;
  harness::ExperimentWorld world;
  std::optional<FingerprintSet> set;
  std::optional<harness::DetectionReport> report;
};

harness::ExperimentConfig desk_config() {
  harness::ExperimentConfig c;
  c.n = 300;
  verify::VerifyConfig residual;
  residual.mode = verify::Mode::kGrayTopK;
  residual.absent = verify::AbsentPolicy::kResidualMass;
  residual.seed = 23;
  c.modes.push_back(residual);
  c.sweeps.samples = {10, 25, 50, 100, 200};
  c.sweeps.n = {10, 50, 150, 300};
  return c;
}

const harness::ModeResult* find_mode(const harness::DetectionReport& r, verify::Mode mode,
                                     verify::AbsentPolicy absent = verify::AbsentPolicy::kLiteralZero) {
  for (const auto& m : r.modes) {
    if (m.config.mode == mode && (mode != verify::Mode::kGrayTopK || m.config.absent == absent)) return &m;
  }
  return nullptr;
}

std::string rates_text(const harness::FamilyRates& r) {
  return fmt("TPR %.3f (PT %.3f, Q %.3f), FPR %.3f", r.overall.tpr(), r.post_training.tpr(),
             r.quantization.tpr(), r.overall.fpr());
}

std::string accuracies_text(const harness::ModeResult& m) {
  std::ostringstream pos, neg;
  pos.precision(3);
  neg.precision(3);
  for (const auto& s : m.suspects) (s.positive ? pos : neg) << s.accuracy << " ";
  return "positives [" + pos.str() + "] negatives [" + neg.str() + "] tau " + fmt("%.4f", m.calibration.tau());
}

// 1 ---------------------------------------------------------------------------

Outcome loss_oracles() {
  using namespace construct;
  const auto vocab = test::tiny_vocab(12);
  const TokenPair pair = test::pair_of(*vocab, 3, 7);
  std::mt19937_64 rng(7);
  std::normal_distribution<double> logit(0.0, 4.0);
  std::uniform_real_distribution<double> weight(0.0, 2.0);
  double worst = 0.0;
  auto rel = [](double a, double b) {
    if (a == b) return 0.0;
    return std::abs(a - b) / std::max(std::abs(b), 1e-300);
  };
  for (int i = 0; i < 1000; ++i) {
    std::vector<double> z(12);
    for (auto& v : z) v = logit(rng);
    const double alpha = weight(rng), beta = weight(rng);
    worst = std::max(worst, rel(uniqueness_loss(z[3], z[7], alpha), test::hp_uniqueness(z[3], z[7], alpha)));
    worst = std::max(worst, rel(robustness_loss(LogitVector(z), pair), test::hp_robustness(z, 3, 7)));
    worst = std::max(worst, rel(total_loss(LogitVector(z), pair, alpha, beta), test::hp_total(z, 3, 7, alpha, beta)));
  }
  const auto five = test::tiny_vocab(5);
  const TokenPair p5 = test::pair_of(*five, 2, 3);
  const bool examples =
      std::abs(uniqueness_loss(0.7, 0.7, 0.3) - std::log(2.0)) < 1e-15 &&
      std::abs(uniqueness_loss(2.0, 1.0, 0.5) - 0.8132616875182228) < 1e-15 &&
      std::abs(uniqueness_loss(0.0, 5.0, 1.0) - 10.006715348489118) < 1e-14 &&
      robustness_loss(LogitVector({-1e6, -1e6, 0.0, 0.0, -1e6}), p5) == 0.0 &&
      std::abs(robustness_loss(LogitVector({0.0, 0.0, 0.0, 4.0, -1e6}), p5) - std::log(2.0)) < 1e-15 &&
      std::abs(total_loss(LogitVector({0.0, 0.0, 0.0, -1.0, -1e6}), p5, 0.5, 1.0) - 1.5064) < 5e-5 &&
      total_loss(LogitVector({0.0, 0.0, 0.0, -1.0, 3.0}), p5, 0.5, 0.0) == uniqueness_loss(0.0, -1.0, 0.5);
  return {worst <= 1e-9 && examples,
          fmt("max relative error %.2e over 3000 evaluations (bound 1e-9), worked examples %s", worst,
              examples ? "exact" : "MISMATCH")};
}

// 2 ---------------------------------------------------------------------------

Outcome gradient_fidelity() {
  const auto vocab = test::tiny_vocab(16);
  double worst = 0.0;
  std::size_t checked = 0;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const auto m = test::tiny_toy(vocab, seed, 16, 32);
    FingerprintPrompt prompt{{2, 3, 4}, TokenSequence(20, 0)};
    std::mt19937_64 rng(seed);
    for (auto& t : prompt.suffix) t = static_cast<TokenId>(2 + rng() % 14);
    const construct::LossSpec spec{test::pair_of(*vocab, 5 + seed % 4, 12), 0.5, 1.0};
    const TokenSequence full = prompt.full();
    const auto rows = construct::suffix_token_gradients(*m, prompt, spec);
    for (std::size_t pos = 0; pos < prompt.suffix.size(); ++pos) {
      const auto g = construct::token_gradient(*m, prompt, pos, spec);
      if (g != rows[pos]) return {false, "single-position and all-position gradients differ"};
      std::vector<double> w(vocab->size(), 0.0);
      w[prompt.suffix[pos]] = 1.0;
      for (std::size_t v = 0; v < vocab->size(); ++v) {
        const double h = 1e-5;
        auto up = w, down = w;
        up[v] += h;
        down[v] -= h;
        const std::size_t at = prompt.suffix_offset() + pos;
        const double lu = construct::total_loss(LogitVector(m->model().logits_relaxed(full, at, up)), spec);
        const double ld = construct::total_loss(LogitVector(m->model().logits_relaxed(full, at, down)), spec);
        const double fd = (lu - ld) / (2 * h);
        worst = std::max(worst, std::abs(g[v] - fd) / std::max(std::abs(fd), 1e-6));
        ++checked;
      }
    }
  }
  return {worst <= 1e-4, fmt("max relative deviation %.2e over %zu entries, 20 suffix positions x 5 models (bound 1e-4)",
                             worst, checked)};
}

// 3 ---------------------------------------------------------------------------

Outcome optimizer_soundness() {
  const auto vocab = test::tiny_vocab(64);
  std::size_t monotone = 0, matched = 0;
  double worst = 0.0;
  for (std::uint64_t i = 0; i < 50; ++i) {
    std::mt19937_64 rng(1000 + i);
    const auto m = test::tiny_toy(vocab, 300 + i, 16, 12);
    const TokenId pos = static_cast<TokenId>(2 + rng() % 62);
    TokenId neg = static_cast<TokenId>(2 + rng() % 62);
    if (neg == pos) neg = pos == 63 ? 2 : pos + 1;
    const TokenPair pair = test::pair_of(*vocab, pos, neg);
    const TokenSequence instruction{static_cast<TokenId>(2 + rng() % 62), static_cast<TokenId>(2 + rng() % 62)};
    construct::ConstructionConfig c;
    c.suffix_length = 4;
    c.init_token = "t0";
    c.seed = i;
    c.iterations = 40;
    c.batch_size = 16;
    c.candidates_per_position = 8;
    const auto g = construct::gcg_optimize(*m, instruction, pair, c);
    bool ok = g.trace.best_loss.empty() || g.trace.best_loss.front() <= g.trace.initial_loss;
    for (std::size_t k = 1; k < g.trace.best_loss.size(); ++k) ok = ok && g.trace.best_loss[k] <= g.trace.best_loss[k - 1];
    monotone += ok;

    c.proposals = construct::ProposalMode::kExhaustive;
    c.iterations = 10000;
    const auto ex = construct::gcg_optimize(*m, instruction, pair, c);
    const auto oracle = construct::exhaustive_descent(*m, instruction, pair, c);
    const FingerprintPrompt p{instruction, oracle};
    const double want = construct::total_loss(m->first_token_logits(p.full()), pair, c.alpha, c.beta);
    const double diff = std::abs(ex.loss - want);
    worst = std::max(worst, diff);
    matched += diff <= 1e-9;
  }
  return {monotone == 50 && matched == 50,
          fmt("non-increasing traces %zu/50, exhaustive-proposal loss matches descent oracle %zu/50 (max gap %.1e)",
              monotone, matched, worst)};
}

// 4 ---------------------------------------------------------------------------

Outcome identity_independence(const Desk& d) {
  const ToyBackend base(d.world.base, d.world.vocab);
  std::vector<std::unique_ptr<ToyBackend>> negatives;
  std::vector<const ModelBackend*> validation;
  for (const auto& m : harness::make_independent_models(d.world.architecture, d.config.validation_seeds)) {
    negatives.push_back(std::make_unique<ToyBackend>(m, d.world.vocab));
    validation.push_back(negatives.back().get());
  }
  verify::VerifyConfig config;
  const auto self = verify::verify(base, base, *d.set, validation, config);
  const auto& acc = self.calibration.validation_accuracies();
  const auto [lo, hi] = std::minmax_element(acc.begin(), acc.end());
  std::size_t inside = 0;
  for (double a : acc) inside += a >= 0.35 && a <= 0.65;
  std::ostringstream all;
  all.precision(3);
  for (double a : acc) all << a << " ";
  info("criterion 4 negative accuracies: " + all.str());
  return {self.accuracy == 1.0 && inside == acc.size(),
          fmt("self accuracy %.6f (want 1.0), %zu/%zu negatives in [0.35, 0.65], range [%.3f, %.3f]",
              self.accuracy, inside, acc.size(), *lo, *hi)};
}

// 5, 6 ------------------------------------------------------------------------

// Regression bounds pinned from the first validated run; see the README.
struct Pinned {
  double tpr_min;
  double fpr_max;
};
const std::map<std::string, Pinned> kPinned = {
    {"grayfull", {1.0, 0.05}},
    {"graytopk", {0.0, 0.0}},
    {"blackbox", {0.0, 0.0}},
};

bool within_pins(const std::string& mode, const harness::FamilyRates& r, std::string& note) {
  const auto& p = kPinned.at(mode);
  const bool ok = r.overall.tpr() >= p.tpr_min - 1e-12 && r.overall.fpr() <= p.fpr_max + 1e-12;
  note += fmt("; pinned %s TPR >= %.3f, FPR <= %.3f: %s", mode.c_str(), p.tpr_min, p.fpr_max, ok ? "held" : "BROKEN");
  return ok;
}

Outcome table_analogue(const Desk& d) {
  const auto* gray = find_mode(*d.report, verify::Mode::kGrayFull);
  const auto* black = find_mode(*d.report, verify::Mode::kBlackBox);
  info("criterion 5 grayfull accuracies: " + accuracies_text(*gray));
  info("criterion 5 blackbox accuracies: " + accuracies_text(*black));
  const bool g = gray->rates.overall.tpr() >= 0.9 && gray->rates.overall.fpr() <= 0.05;
  const bool b = black->rates.overall.tpr() >= 0.9 && black->rates.overall.fpr() <= 0.05;
  std::string note;
  const bool pins = within_pins("grayfull", gray->rates, note) & within_pins("blackbox", black->rates, note);
  return {g && b && pins, "grayfull " + rates_text(gray->rates) + (g ? " ok" : " MISSED") + "; blackbox " +
                              rates_text(black->rates) + (b ? " ok" : " MISSED") + note};
}

Outcome topk_parity(const Desk& d) {
  const auto* gray = find_mode(*d.report, verify::Mode::kGrayFull);
  const auto* topk = find_mode(*d.report, verify::Mode::kGrayTopK);
  const auto* residual = find_mode(*d.report, verify::Mode::kGrayTopK, verify::AbsentPolicy::kResidualMass);
  info("criterion 6 graytopk accuracies: " + accuracies_text(*topk));
  info("criterion 6 variant, absent token scored log(1 - listed mass): " + rates_text(residual->rates) +
       "; " + accuracies_text(*residual));
  const double gap = std::abs(topk->rates.overall.tpr() - gray->rates.overall.tpr());
  std::string note;
  const bool pins = within_pins("graytopk", topk->rates, note);
  return {gap <= 0.05 && topk->rates.overall.fpr() <= 0.05 && pins,
          fmt("graytopk (k = 20, absent = 0) ", 0) + rates_text(topk->rates) +
              fmt("; |TPR gap| to grayfull %.3f (bound 0.05), FPR bound 0.05", gap) + note};
}

// 7 ---------------------------------------------------------------------------

Outcome blackbox_concentration(const Desk& d) {
  // Pool entries with probability gap >= 0.2 over the base, its derivatives
  // and the negatives; logits are cached so each repetition only samples.
  std::vector<std::shared_ptr<const ToyLM>> models{d.world.base};
  for (const auto& s : harness::make_suspect_family(*d.world.base, d.config.family)) models.push_back(s.model);
  std::size_t entries = 0, agree = 0, trials = 0;
  double predicted = 0.0;
  for (const auto& model : models) {
    const ToyBackend local(model, d.world.vocab);
    std::map<TokenSequence, std::vector<double>> cache;
    std::vector<FingerprintEntry> chosen;
    std::vector<double> p_plus, p_minus;
    for (const auto& e : d.set->entries()) {
      const auto full = e.prompt.full();
      const auto logits = local.first_token_logits(full);
      const auto p = logits.softmax();
      if (std::abs(p[e.pair.positive.id] - p[e.pair.negative.id]) < 0.2) continue;
      cache.emplace(full, std::vector<double>(logits.values().begin(), logits.values().end()));
      chosen.push_back(e);
      p_plus.push_back(p[e.pair.positive.id]);
      p_minus.push_back(p[e.pair.negative.id]);
    }
    if (chosen.empty()) continue;
    const FingerprintSet subset(chosen);
    const FunctionBackend cached(
        d.world.vocab, [&cache](TokenSpan prompt) { return cache.at(TokenSequence(prompt.begin(), prompt.end())); },
        model->id());
    verify::VerifyConfig gray;
    const auto reference = verify::graybox_bits(cached, subset, gray);
    for (std::size_t j = 0; j < chosen.size(); ++j) {
      const double q = test::tie_rule_bit_probability(100, p_plus[j], p_minus[j]);
      predicted += reference[j] ? q : 1.0 - q;
    }
    verify::VerifyConfig black;
    black.mode = verify::Mode::kBlackBox;
    black.samples = 100;
    black.workers = 0;
    for (std::uint64_t rep = 0; rep < 1000; ++rep) {
      black.seed = mix_seed(rep, 77);
      const auto bits = verify::blackbox_bits(cached, subset, black).first;
      for (std::size_t j = 0; j < bits.size(); ++j) agree += bits[j] == reference[j];
    }
    entries += chosen.size();
    trials += 1000 * chosen.size();
  }
  if (entries == 0) return {false, "no entry has a probability gap >= 0.2"};
  const double rate = static_cast<double>(agree) / static_cast<double>(trials);
  const double expect = predicted / static_cast<double>(entries);
  const double sd = std::sqrt(expect * (1 - expect) / static_cast<double>(trials));
  const bool consistent = std::abs(rate - expect) <= 5 * sd + 1e-9;

  // T sweep from the desk run.
  std::vector<std::pair<double, double>> sweep;
  for (const auto& p : d.report->sweeps) {
    if (p.axis == "T") sweep.emplace_back(p.value, p.rates.overall.tpr());
  }
  std::sort(sweep.begin(), sweep.end());
  std::string shape;
  double at100 = -1, at10 = -1, at200 = -1;
  bool rising = true;
  for (std::size_t i = 0; i < sweep.size(); ++i) {
    shape += fmt("T=%g:%.3f ", sweep[i].first, sweep[i].second);
    if (i > 0 && sweep[i].second < sweep[i - 1].second - 0.05) rising = false;
    if (sweep[i].first == 10) at10 = sweep[i].second;
    if (sweep[i].first == 100) at100 = sweep[i].second;
    if (sweep[i].first == 200) at200 = sweep[i].second;
  }
  const bool saturates = at100 >= at10 && std::abs(at200 - at100) <= 0.05 && at100 >= 0.9;
  return {rate > 0.99 && consistent && rising && saturates,
          fmt("agreement %.5f over %zu entries x 1000 repetitions (bound 0.99), binomial oracle %.5f +- %.5f; ",
              rate, entries, expect, 5 * sd) +
              "T sweep TPR " + shape + (rising && saturates ? "rises and saturates" : "does NOT rise to a plateau >= 0.9")};
}

// 8 ---------------------------------------------------------------------------

Outcome calibration_arithmetic() {
  const auto c = CalibrationModel::fit({0.48, 0.50, 0.52}, 1.64);
  const auto flat = CalibrationModel::fit({0.53, 0.53, 0.53, 0.53}, 1.64);
  const bool ok = std::abs(c.tau() - 0.5328) <= 1e-12 && c.tau() == c.mu() + c.z() * c.sigma() &&
                  std::abs(c.sigma() - 0.02) <= 1e-15 && flat.sigma() == 0.0 && flat.tau() == flat.mu() &&
                  decide(c.tau(), c).positive() && !decide(0.5, c).positive();
  return {ok, fmt("tau %.17g (mu %.17g, sigma %.17g), zero-spread tau %.17g = mu %.17g", c.tau(), c.mu(),
                  c.sigma(), flat.tau(), flat.mu())};
}

// 9 ---------------------------------------------------------------------------

Outcome remote_conformance(const Desk& d) {
  const auto base = std::make_shared<const ToyBackend>(d.world.base, d.world.vocab);
  std::vector<std::unique_ptr<ToyBackend>> negatives;
  std::vector<const ModelBackend*> validation;
  for (const auto& m : harness::make_independent_models(d.world.architecture, d.config.validation_seeds)) {
    negatives.push_back(std::make_unique<ToyBackend>(m, d.world.vocab));
    validation.push_back(negatives.back().get());
  }
  std::vector<std::string> surfaces;
  for (TokenId id : d.world.vocab->ordinary_ids()) surfaces.push_back(d.world.vocab->surface(id));

  remote::MockServerOptions options;
  options.api_key = "acceptance-key";
  remote::MockCompletionServer identity(remote::backend_distribution(base), options);
  remote::MockCompletionServer random(remote::random_distribution(surfaces, 99), options);
  identity.start();
  random.start();
  const remote::EnvLookup env = [](const std::string& n) -> std::optional<std::string> {
    if (n == "MOCK_API_KEY") return "acceptance-key";
    return std::nullopt;
  };
  auto spec_for = [](const remote::MockCompletionServer& s) {
    remote::EndpointSpec e;
    e.base_url = s.url();
    e.model = "mock";
    e.api_key_env = "MOCK_API_KEY";
    e.batch_choices = 100;
    e.max_concurrency = 4;
    e.requests_per_second = 50;
    e.initial_backoff = 10ms;
    return e;
  };
  const remote::RemoteBackend identity_suspect(spec_for(identity), d.world.vocab, env);
  const remote::RemoteBackend random_suspect(spec_for(random), d.world.vocab, env);
  const BitString reference = d.set->reference_bits();

  std::string detail;
  bool ok = true;
  auto run_mode = [&](verify::VerifyConfig config, const std::string& label, bool report_only) {
    const auto cal = verify::calibrate(reference, *d.set, validation, config);
    const auto id = verify::verify_with(reference, identity_suspect, *d.set, cal, config);
    const auto rnd = verify::verify_with(reference, random_suspect, *d.set, cal, config);
    const bool good = id.verdict.positive() && !rnd.verdict.positive();
    const std::string line = fmt("%s identity %.3f %s, random %.3f %s, tau %.4f", label.c_str(), id.accuracy,
                                 id.verdict.positive() ? "positive" : "negative", rnd.accuracy,
                                 rnd.verdict.positive() ? "positive" : "negative", cal.tau());
    if (config.mode == verify::Mode::kGrayTopK && config.absent == verify::AbsentPolicy::kLiteralZero) {
      const auto local = verify::verify_with(reference, *base, *d.set, cal, config);
      info(fmt("criterion 9 local base %s accuracy %.4f, remote identity %.4f, predicted bits %s", label.c_str(),
               local.accuracy, id.accuracy, local.predicted == id.predicted ? "identical" : "DIFFER"));
    }
    if (report_only) {
      info("criterion 9 variant " + line);
    } else {
      ok = ok && good;
      detail += line + (good ? " ok; " : " WRONG; ");
    }
  };
  verify::VerifyConfig gray;
  gray.mode = verify::Mode::kGrayTopK;
  gray.top_k = 20;
  gray.workers = 4;
  run_mode(gray, "gray-box (top-20)", false);
  verify::VerifyConfig black;
  black.mode = verify::Mode::kBlackBox;
  black.samples = 100;
  black.seed = 5;
  black.workers = 4;
  run_mode(black, "black-box (T = 100)", false);
  gray.absent = verify::AbsentPolicy::kResidualMass;
  run_mode(gray, "gray-box residual-mass", true);

  // Rate cap and retries, read back from the server log.
  identity.clear_requests();
  auto capped = spec_for(identity);
  capped.requests_per_second = 5;
  capped.batch_choices = 1;
  remote::CompletionClient client(capped, env);
  identity.inject_failures(2, 429);
  const auto texts = remote::remote_sample_texts(client, "Randomly output a word", 15, 1.0, 1);
  const auto log = identity.requests();
  std::size_t worst_window = 0, rejected = 0;
  for (const auto& r : log) {
    rejected += r.status == 429;
    std::size_t in = 0;
    for (const auto& q : log) in += q.received >= r.received && q.received < r.received + 1s;
    worst_window = std::max(worst_window, in);
  }
  const bool limits = texts.errors.empty() && worst_window <= 5 && rejected == 2 &&
                      client.stats().retries == 2 && log.size() == 17;
  ok = ok && limits;
  detail += fmt("rate cap 5/s: busiest 1 s window %zu requests; 2 injected 429s -> %zu retries, %zu logged requests %s",
                worst_window, client.stats().retries, log.size(), limits ? "ok" : "WRONG");
  return {ok, detail};
}

// Mean probability the model puts on {w+, w-} and the share of prompts where
// T = 100 draws would see neither word with probability above one half.
void pair_mass_info(const std::string& label, const ModelBackend& model, const FingerprintSet& set) {
  double mass = 0.0;
  std::size_t unseen = 0;
  for (const auto& e : set.entries()) {
    const auto p = model.first_token_logits(e.prompt.full()).softmax();
    const double m = p[e.pair.positive.id] + p[e.pair.negative.id];
    mass += m;
    unseen += std::pow(1.0 - m, 100) > 0.5;
  }
  info(fmt("%s: mean pair mass %.4f, prompts where both counts are likely 0 at T = 100: %zu/%zu", label.c_str(),
           mass / static_cast<double>(set.size()), unseen, set.size()));
}

}  // namespace

int main(int argc, char** argv) {
  std::string load_path, save_path;
  for (int i = 1; i + 1 < argc; i += 2) {
    const std::string flag = argv[i];
    if (flag == "--fingerprints") load_path = argv[i + 1];
    else if (flag == "--save-fingerprints") save_path = argv[i + 1];
  }

  criterion(1, "loss oracles", loss_oracles);
  criterion(2, "gradient fidelity", gradient_fidelity);
  criterion(3, "optimizer soundness", optimizer_soundness);
  criterion(8, "calibration arithmetic", calibration_arithmetic);

  Desk d;
  d.config = desk_config();
  d.world = harness::make_world(d.config);
  try {
    const auto t0 = std::chrono::steady_clock::now();
    if (!load_path.empty() && std::filesystem::exists(load_path)) {
      d.set = deserialize_fingerprints(read_text_file(load_path));
      info("loaded " + std::to_string(d.set->size()) + " fingerprints from " + load_path);
    } else {
      harness::FingerprintSummary summary;
      d.set = harness::build_experiment_fingerprints(d.world, d.config, d.config.construction, d.config.n, &summary);
      info(fmt("constructed %zu fingerprints (%zu failed), mean final loss %.4f, %zu reference ones",
               summary.count, summary.failures, summary.mean_final_loss, d.set->reference_bits().count_ones()));
      if (!save_path.empty()) write_text_file(save_path, serialize(*d.set));
    }
    info(fmt("reference bits: %zu of %zu are 1", d.set->reference_bits().count_ones(), d.set->size()));
    pair_mass_info("base", ToyBackend(d.world.base, d.world.vocab), *d.set);
    const auto negatives = harness::make_independent_models(d.world.architecture, {2001, 2002, 2003});
    for (const auto& m : negatives) pair_mass_info("negative " + m->id(), ToyBackend(m, d.world.vocab), *d.set);
    d.report = harness::run_experiment(d.config, d.set);
    info(fmt("desk experiment finished in %.0fs",
             std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count()));
  } catch (const std::exception& e) {
    std::cout << "FAIL desk setup: " << e.what() << std::endl;
    return 1;
  }

  criterion(4, "identity/independence dichotomy", [&] { return identity_independence(d); });
  criterion(5, "desk-scale detection table", [&] { return table_analogue(d); });
  criterion(6, "top-k parity", [&] { return topk_parity(d); });
  criterion(7, "black-box concentration and T sweep", [&] { return blackbox_concentration(d); });
  criterion(9, "remote client conformance", [&] { return remote_conformance(d); });

  std::cout << harness::to_markdown(*d.report);
  std::cout << (g_failures == 0 ? "ALL CRITERIA PASSED" : fmt("%d CRITERIA FAILED", g_failures)) << std::endl;
  return g_failures == 0 ? 0 : 1;
}
