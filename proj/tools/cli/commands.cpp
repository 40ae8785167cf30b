#include "cli/commands.hpp"

#include <algorithm>
#include <atomic>
#include <csignal>
#include <functional>
#include <iostream>
#include <optional>
#include <set>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "cli/model_spec.hpp"
#include "llmprint/construct/builder.hpp"
#include "llmprint/core/serialize.hpp"
#include "llmprint/harness/experiment.hpp"
#include "llmprint/harness/report.hpp"
#include "llmprint/pairs/sampler.hpp"
#include "llmprint/remote/mock_server.hpp"
#include "llmprint/verify/verify.hpp"

namespace llmprint::cli {
namespace {

using nlohmann::json;

/// Failure tagged with the pipeline stage that raised it.
class StageFailure : public Error {
 public:
  StageFailure(const std::string& stage, const std::string& message)
      : Error(stage + ": " + message) {}
};

template <typename F>
auto stage(const std::string& name, F&& fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const StageFailure&) {
    throw;
  } catch (const std::exception& e) {
    throw StageFailure(name, e.what());
  }
}

void emit(const std::string& path, const std::string& text, std::ostream& out) {
  if (path.empty() || path == "-") {
    out << text;
  } else {
    write_text_file(path, text);
  }
}

std::string dashed(std::string key) {
  std::replace(key.begin(), key.end(), '_', '-');
  return key;
}

std::string scalar_text(const json& v) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_number() || v.is_boolean()) return v.dump();
  throw InvalidArgument("config values must be scalars or lists of scalars, got " + v.dump());
}

struct VerifyFlags {
  std::string mode = "grayfull";
  std::size_t top_k = 20;
  std::size_t samples = 100;
  double temperature = 1.0;
  double z = 1.64;
  std::uint64_t seed = 0;
  std::string absent = "literal";
  std::size_t workers = 1;

  void add(CLI::App& cmd, bool with_z) {
    cmd.add_option("--mode", mode, "grayfull, graytopk or blackbox")
        ->check(CLI::IsMember({"grayfull", "graytopk", "blackbox"}));
    cmd.add_option("--topk", top_k, "top-k list length for graytopk");
    cmd.add_option("--T", samples, "black-box samples per prompt");
    cmd.add_option("--temperature", temperature, "black-box sampling temperature");
    if (with_z) cmd.add_option("--z", z, "one-sided z-score for the threshold");
    cmd.add_option("--seed", seed, "black-box sampling seed");
    cmd.add_option("--absent", absent, "score for tokens missing from a top-k list")
        ->check(CLI::IsMember({"literal", "residual"}));
    cmd.add_option("--workers", workers, "concurrent prompt queries");
  }

  verify::VerifyConfig config() const {
    verify::VerifyConfig c;
    c.mode = verify::parse_mode(mode);
    c.top_k = top_k;
    c.samples = samples;
    c.temperature = temperature;
    c.z = z;
    c.seed = seed;
    c.absent = absent == "residual" ? verify::AbsentPolicy::kResidualMass
                                    : verify::AbsentPolicy::kLiteralZero;
    c.workers = workers;
    c.validate();
    return c;
  }
};

FingerprintSet load_fingerprints(const std::string& path) {
  return stage("load fingerprints", [&] { return deserialize_fingerprints(read_text_file(path)); });
}

std::shared_ptr<const Vocabulary> vocabulary() { return pairs::make_toy_vocabulary(); }

json counts_json(const verify::SampleCounts& counts) {
  json out = json::array();
  for (const auto& c : counts) out.push_back({c.c_plus, c.c_minus, c.total});
  return out;
}

std::atomic<remote::MockCompletionServer*> g_server{nullptr};

void stop_server(int) {
  if (auto* s = g_server.load()) s->stop();
}

remote::DistributionFn mock_distribution(const std::string& spec,
                                         std::shared_ptr<const Vocabulary> vocab) {
  if (spec.starts_with("constant:")) return remote::constant_distribution(spec.substr(9));
  if (spec.starts_with("random:")) {
    std::vector<std::string> surfaces;
    for (TokenId id : vocab->ordinary_ids()) surfaces.push_back(vocab->surface(id));
    return remote::random_distribution(std::move(surfaces), std::stoull(spec.substr(7)));
  }
  return remote::backend_distribution(resolve_model(spec, vocab).backend);
}

}  // namespace

std::vector<std::string> expand_config(std::vector<std::string> args) {
  if (args.empty() || args[0] == "simulate") return args;
  std::optional<std::string> path;
  std::vector<std::string> kept{args[0]};
  for (std::size_t i = 1; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) {
      path = args[++i];
    } else if (args[i].starts_with("--config=")) {
      path = args[i].substr(9);
    } else {
      kept.push_back(args[i]);
    }
  }
  if (!path) return args;
  const json doc = stage("config", [&] {
    const json j = json::parse(read_text_file(*path));
    if (!j.is_object()) throw FormatError("config file must hold a JSON object");
    return j;
  });
  std::set<std::string> given;
  for (const auto& a : kept) {
    if (a.starts_with("--")) given.insert(a.substr(0, a.find('=')));
  }
  std::vector<std::string> out{kept[0]};
  for (const auto& [key, value] : doc.items()) {
    const std::string flag = "--" + dashed(key);
    if (given.count(flag)) continue;
    stage("config", [&] {
      if (value.is_boolean()) {
        if (value.get<bool>()) out.push_back(flag);
      } else if (value.is_array()) {
        for (const auto& v : value) {
          out.push_back(flag);
          out.push_back(scalar_text(v));
        }
      } else {
        out.push_back(flag);
        out.push_back(scalar_text(value));
      }
    });
  }
  out.insert(out.end(), kept.begin() + 1, kept.end());
  return out;
}

int run(std::vector<std::string> args, std::ostream& out, std::ostream& err) {
  CLI::App app("Fingerprint construction and ownership verification for language models",
               "llmprint");
  app.require_subcommand(1);
  app.set_version_flag("--version", "llmprint 0.1.0");
  std::function<void()> action;

  // pairs
  auto* pairs_cmd = app.add_subcommand("pairs", "Sample within-category token pairs");
  std::size_t pair_n = 300;
  std::uint64_t pair_seed = 0;
  std::vector<std::string> categories;
  std::string pairs_out;
  pairs_cmd->add_option("--n", pair_n, "number of pairs");
  pairs_cmd->add_option("--seed", pair_seed, "sampling seed");
  pairs_cmd->add_option("--categories", categories, "restrict to these catalog categories");
  pairs_cmd->add_option("--out", pairs_out, "output file (default stdout)");
  pairs_cmd->callback([&] {
    action = [&] {
      const auto vocab = vocabulary();
      const auto catalog = categories.empty() ? pairs::CategoryCatalog::standard()
                                              : pairs::CategoryCatalog::standard().subset(categories);
      const auto sampled =
          stage("sample pairs", [&] { return pairs::sample_token_pairs(catalog, *vocab, pair_n, pair_seed); });
      stage("write pairs", [&] { emit(pairs_out, dump_canonical(pair_list_to_json(sampled)), out); });
    };
  });

  // construct
  auto* construct_cmd = app.add_subcommand("construct", "Optimize fingerprint suffixes on a base model");
  std::string c_model, c_pairs, c_out, c_instruction, c_proposals = "auto";
  std::size_t c_n = 300, c_workers = 0;
  std::uint64_t c_pair_seed = 7;
  construct::ConstructionConfig cc;
  construct_cmd->add_option("--model", c_model, "base model spec")->required();
  construct_cmd->add_option("--pairs", c_pairs, "pair list from `pairs` (sampled when absent)");
  construct_cmd->add_option("--n", c_n, "pairs to sample when --pairs is absent");
  construct_cmd->add_option("--pair-seed", c_pair_seed, "pair sampling seed when --pairs is absent");
  construct_cmd->add_option("--alpha", cc.alpha, "uniqueness margin weight");
  construct_cmd->add_option("--beta", cc.beta, "robustness weight");
  construct_cmd->add_option("--suffix-len", cc.suffix_length, "suffix tokens");
  construct_cmd->add_option("--iters", cc.iterations, "optimizer iterations");
  construct_cmd->add_option("--candidates", cc.candidates_per_position, "gradient candidates per position");
  construct_cmd->add_option("--batch", cc.batch_size, "substitutions scored per iteration");
  construct_cmd->add_option("--patience", cc.patience, "stop after this many idle iterations (0 = never)");
  construct_cmd->add_option("--init-token", cc.init_token, "placeholder suffix token");
  construct_cmd->add_option("--proposals", c_proposals, "auto, gradient, random or exhaustive");
  construct_cmd->add_option("--seed", cc.seed, "optimizer seed");
  construct_cmd->add_option("--instruction", c_instruction, "instruction placed before each suffix");
  construct_cmd->add_option("--workers", c_workers, "optimizer threads (0 = all cores)");
  construct_cmd->add_option("--out", c_out, "fingerprint file")->required();
  construct_cmd->callback([&] {
    action = [&] {
      const auto vocab = vocabulary();
      stage("config", [&] {
        cc.proposals = construct::parse_proposal_mode(c_proposals);
        cc.validate();
      });
      const auto model = stage("load model", [&] { return resolve_model(c_model, vocab); });
      const auto token_pairs = stage("load pairs", [&] {
        if (c_pairs.empty()) {
          return pairs::sample_token_pairs(pairs::CategoryCatalog::standard(), *vocab, c_n, c_pair_seed);
        }
        return pair_list_from_json(json::parse(read_text_file(c_pairs)));
      });
      const auto instruction =
          vocab->tokenize(c_instruction.empty() ? pairs::kDefaultInstruction : c_instruction);
      const auto result = stage("construct", [&] {
        return construct::build_fingerprints(*model.backend, token_pairs, instruction, cc, c_workers);
      });
      for (const auto& f : result.failures) {
        err << "pair " << f.index << " (" << f.pair.positive.surface << ", " << f.pair.negative.surface
            << ") failed: " << f.message << "\n";
      }
      if (!result.set) throw StageFailure("construct", "every pair failed");
      stage("write fingerprints", [&] { write_text_file(c_out, serialize(*result.set)); });
      err << "constructed " << result.set->size() << " fingerprints, " << result.failures.size()
          << " failed\n";
    };
  });

  // calibrate
  auto* calibrate_cmd = app.add_subcommand("calibrate", "Fit the detection threshold on negative models");
  std::string k_fingerprints, k_out;
  std::vector<std::string> k_validation;
  VerifyFlags k_flags;
  calibrate_cmd->add_option("--fingerprints", k_fingerprints, "fingerprint file")->required();
  calibrate_cmd->add_option("--validation", k_validation, "validation negative model specs (at least 2)")
      ->required();
  k_flags.add(*calibrate_cmd, true);
  calibrate_cmd->add_option("--out", k_out, "calibration file (default stdout)");
  calibrate_cmd->callback([&] {
    action = [&] {
      const auto vocab = vocabulary();
      const auto config = stage("config", [&] { return k_flags.config(); });
      const auto set = load_fingerprints(k_fingerprints);
      std::vector<ResolvedModel> models;
      std::vector<const ModelBackend*> validation;
      stage("load validation models", [&] {
        for (const auto& spec : k_validation) models.push_back(resolve_model(spec, vocab));
        for (const auto& m : models) validation.push_back(m.backend.get());
      });
      const auto model = stage("calibration", [&] {
        return verify::calibrate(set.reference_bits(), set, validation, config);
      });
      stage("write calibration", [&] { emit(k_out, serialize(model), out); });
    };
  });

  // verify
  auto* verify_cmd = app.add_subcommand("verify", "Decide whether a suspect derives from the base");
  std::string v_fingerprints, v_suspect, v_calibration, v_out;
  VerifyFlags v_flags;
  verify_cmd->add_option("--fingerprints", v_fingerprints, "fingerprint file")->required();
  verify_cmd->add_option("--suspect", v_suspect, "suspect model spec")->required();
  verify_cmd->add_option("--calibration", v_calibration, "calibration file")->required();
  v_flags.add(*verify_cmd, false);
  verify_cmd->add_option("--out", v_out, "verdict report (default stdout)");
  verify_cmd->callback([&] {
    action = [&] {
      const auto vocab = vocabulary();
      const auto calibration = stage("load calibration", [&] {
        return deserialize_calibration(read_text_file(v_calibration));
      });
      if (verify_cmd->count("--mode") == 0 && !calibration.mode().empty()) v_flags.mode = calibration.mode();
      v_flags.z = calibration.z();
      const auto config = stage("config", [&] { return v_flags.config(); });
      const auto set = load_fingerprints(v_fingerprints);
      const auto suspect = stage("load suspect", [&] { return resolve_model(v_suspect, vocab); });
      const auto r = stage("verify", [&] {
        return verify::verify_with(set.reference_bits(), *suspect.backend, set, calibration, config);
      });
      json doc = {{"suspect", r.suspect_id},
                  {"mode", verify::to_string(r.mode)},
                  {"n", r.reference.size()},
                  {"accuracy", r.accuracy},
                  {"threshold", r.verdict.threshold},
                  {"decision", to_string(r.verdict.decision)},
                  {"reference_bits", r.reference.to_string()},
                  {"predicted_bits", r.predicted.to_string()},
                  {"calibration", to_json(r.calibration)}};
      if (r.counts) doc["sample_counts"] = counts_json(*r.counts);
      stage("write verdict", [&] { emit(v_out, dump_canonical(doc), out); });
    };
  });

  // simulate
  auto* simulate_cmd = app.add_subcommand("simulate", "Run the full detection experiment on toy models");
  std::string s_config, s_out_dir, s_fingerprints;
  std::optional<std::size_t> s_n, s_workers;
  std::optional<std::uint64_t> s_base_seed;
  bool s_quiet = false;
  simulate_cmd->add_option("--config", s_config, "experiment config (JSON)");
  simulate_cmd->add_option("--out-dir", s_out_dir, "directory for report and fingerprint files");
  simulate_cmd->add_option("--fingerprints", s_fingerprints, "reuse a fingerprint file built from the same base");
  simulate_cmd->add_option("--n", s_n, "fingerprints scored");
  simulate_cmd->add_option("--workers", s_workers, "threads (0 = all cores)");
  simulate_cmd->add_option("--base-seed", s_base_seed, "base model seed");
  simulate_cmd->add_flag("--quiet", s_quiet, "suppress progress messages");
  simulate_cmd->callback([&] {
    action = [&] {
      auto config = stage("config", [&] {
        harness::ExperimentConfig c;
        if (!s_config.empty()) c = harness::experiment_config_from_json(json::parse(read_text_file(s_config)));
        if (!s_out_dir.empty()) c.output_dir = s_out_dir;
        if (s_n) c.n = *s_n;
        if (s_workers) c.workers = *s_workers;
        if (s_base_seed) c.base_seed = *s_base_seed;
        c.validate();
        return c;
      });
      std::optional<FingerprintSet> prebuilt;
      if (!s_fingerprints.empty()) prebuilt = load_fingerprints(s_fingerprints);
      harness::Progress progress;
      if (!s_quiet) progress = [&err](const std::string& m) { err << "[simulate] " << m << "\n"; };
      const auto report = stage("experiment", [&] { return harness::run_experiment(config, prebuilt, progress); });
      out << harness::to_markdown(report);
    };
  });

  // report
  auto* report_cmd = app.add_subcommand("report", "Convert a detection report between formats");
  std::string r_input, r_format = "markdown", r_out;
  report_cmd->add_option("--input", r_input, "report.json or report.csv")->required();
  report_cmd->add_option("--format", r_format, "json, csv or markdown");
  report_cmd->add_option("--out", r_out, "output file (default stdout)");
  report_cmd->callback([&] {
    action = [&] {
      const auto format = stage("config", [&] { return harness::parse_report_format(r_format); });
      const auto report = stage("load report", [&] {
        const std::string text = read_text_file(r_input);
        if (r_input.ends_with(".csv")) return harness::report_from_csv(text);
        return harness::report_from_json(json::parse(text));
      });
      stage("write report", [&] { emit(r_out, harness::render(report, format), out); });
    };
  });

  // mock-server
  auto* mock_cmd = app.add_subcommand("mock-server", "Serve a model through an OpenAI-style completions API");
  std::string m_host = "127.0.0.1", m_model = "mock", m_key_env, m_distribution = "toy:1";
  int m_port = 8080;
  std::size_t m_max_logprobs = 20;
  bool m_no_logprobs = false;
  mock_cmd->add_option("--host", m_host, "bind address");
  mock_cmd->add_option("--port", m_port, "port (0 picks a free one)");
  mock_cmd->add_option("--model", m_model, "model name clients must send");
  mock_cmd->add_option("--api-key-env", m_key_env, "environment variable holding the required key");
  mock_cmd->add_option("--distribution", m_distribution,
                       "model spec, constant:<surface> or random:<seed>");
  mock_cmd->add_option("--max-logprobs", m_max_logprobs, "largest logprobs value accepted");
  mock_cmd->add_flag("--no-logprobs", m_no_logprobs, "reject requests for log-probabilities");
  mock_cmd->callback([&] {
    action = [&] {
      remote::MockServerOptions options;
      options.model = m_model;
      options.max_logprobs = m_max_logprobs;
      options.logprobs_supported = !m_no_logprobs;
      if (!m_key_env.empty()) {
        options.api_key = remote::process_env(m_key_env);
        if (!options.api_key) throw StageFailure("config", "environment variable " + m_key_env + " is not set");
      }
      auto dist = stage("load model", [&] { return mock_distribution(m_distribution, vocabulary()); });
      remote::MockCompletionServer server(std::move(dist), options);
      g_server = &server;
      std::signal(SIGINT, stop_server);
      std::signal(SIGTERM, stop_server);
      err << "serving " << m_model << " on http://" << m_host << ":" << m_port << "\n";
      stage("serve", [&] { server.serve(m_host, m_port); });
      g_server = nullptr;
    };
  });

  std::string command = args.empty() ? std::string() : args.front();
  try {
    args = expand_config(std::move(args));
    std::reverse(args.begin(), args.end());
    app.parse(args);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::CallForVersion&) {
    out << app.version() << "\n";
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "llmprint: " << e.what() << "\n";
    if (auto* sub = app.get_subcommands().empty() ? nullptr : app.get_subcommands().front()) {
      err << "run 'llmprint " << sub->get_name() << " --help' for usage\n";
    }
    return 2;
  } catch (const std::exception& e) {
    err << "llmprint " << command << ": " << e.what() << "\n";
    return 1;
  }
  try {
    action();
  } catch (const std::exception& e) {
    err << "llmprint " << command << ": " << e.what() << "\n";
    return 1;
  }
  return 0;
}

}  // namespace llmprint::cli
