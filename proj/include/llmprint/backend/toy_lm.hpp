#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "llmprint/backend/backend.hpp"
#include "llmprint/core/types.hpp"

namespace llmprint {

struct ToyConfig {
  std::size_t vocab_size = 0;
  std::size_t context_length = 32;
  std::size_t hidden_width = 48;
  std::size_t layers = 2;
  /// Feed-forward width; 0 selects 4 * hidden_width.
  std::size_t ffn_width = 0;
  TokenId bos_id = 0;
  /// Appended after every prompt when set, like the closing marker of a
  /// chat template; first-token logits are read at this position.
  std::optional<TokenId> end_id;

  std::size_t ffn() const { return ffn_width == 0 ? 4 * hidden_width : ffn_width; }
  void validate() const;

  friend bool operator==(const ToyConfig&, const ToyConfig&) = default;
};

/// Default architecture over `vocab`: <bos> as the start token and <eos>,
/// when present, as the end marker.
ToyConfig toy_config_for(const Vocabulary& vocab);

/// Named row-major parameter matrix.
struct Tensor {
  std::string name;
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;

  friend bool operator==(const Tensor&, const Tensor&) = default;
};

/// Small decoder-only transformer used as a desk-scale language model.
///
/// Pre-norm blocks (single-head causal attention, tanh-GELU feed-forward),
/// learned positional embeddings, parameter-free layer norm, and an output
/// projection tied to the token embedding. A `<bos>` token is prepended to
/// every prompt and the optional end marker appended. Logits are a pure
/// function of (weights, prompt).
class ToyLM {
 public:
  /// Seeded Gaussian weights with standard deviation 1/sqrt(fan-in).
  static ToyLM init(const ToyConfig& config, std::uint64_t seed);

  const ToyConfig& config() const { return config_; }
  std::uint64_t seed() const { return seed_; }
  /// Derivation chain applied after initialization, e.g. "/q8/p0.01@3".
  const std::string& lineage() const { return lineage_; }
  std::string id() const;
  const std::vector<Tensor>& tensors() const { return tensors_; }
  std::size_t max_prompt_length() const {
    return config_.context_length - 1 - (config_.end_id ? 1 : 0);
  }

  /// Same architecture with replaced parameters; shapes and names must match.
  ToyLM with_tensors(std::vector<Tensor> tensors, const std::string& lineage_step) const;

  std::vector<double> logits(TokenSpan prompt) const;

  /// Logits with the one-hot input at `position` replaced by the convex (or
  /// arbitrary) mixture `weights` over the vocabulary.
  std::vector<double> logits_relaxed(TokenSpan prompt, std::size_t position,
                                     std::span<const double> weights) const;

  /// d(loss)/d(one-hot) rows for positions [first_position, prompt.size()).
  std::vector<std::vector<double>> input_gradients(TokenSpan prompt, std::size_t first_position,
                                                   std::span<const double> dlogits) const;

  /// Incremental evaluation of single-token substitutions. Reuses the
  /// activations of positions before the substituted one; results are
  /// bit-identical to `logits` on the substituted prompt.
  class Substitutions {
   public:
    Substitutions(const ToyLM& model, TokenSpan prompt);
    std::vector<double> logits_with(std::size_t position, TokenId token);

   private:
    const ToyLM& model_;
    TokenSequence tokens_;  // includes <bos> and the end marker
    std::vector<double> base_x_, base_k_, base_v_;
    std::vector<double> x_, k_, v_;
    std::size_t prompt_size_ = 0;
    std::size_t dirty_from_;
    std::vector<double> out_;
  };

  void save(const std::filesystem::path& path) const;
  static ToyLM load(const std::filesystem::path& path);

  friend bool operator==(const ToyLM&, const ToyLM&) = default;

 private:
  ToyLM() = default;

  struct LayerWeights {
    const double* wq;
    const double* wk;
    const double* wv;
    const double* wo;
    const double* w1;
    const double* w2;
  };
  LayerWeights layer(std::size_t l) const;
  const double* token_embedding() const { return tensors_[0].data.data(); }
  const double* position_embedding() const { return tensors_[1].data.data(); }

  void check_prompt(TokenSpan prompt) const;
  void embed(TokenId token, std::size_t pos, double* out) const;
  /// <bos>, prompt, end marker.
  TokenSequence sequence(TokenSpan prompt) const;
  std::vector<double> embed_all(const TokenSequence& tokens) const;
  /// Key/value for position i (and the block output when `out` is non-null).
  void layer_step(const LayerWeights& w, const double* x, std::size_t i, double* keys,
                  double* values, double* out) const;
  std::vector<double> head(const double* final_hidden) const;
  std::vector<double> forward(std::vector<double> x0, std::size_t length) const;

  ToyConfig config_;
  std::uint64_t seed_ = 0;
  std::string lineage_;
  std::vector<Tensor> tensors_;
};

/// ModelBackend over a shared, immutable ToyLM.
class ToyBackend final : public ModelBackend {
 public:
  ToyBackend(std::shared_ptr<const ToyLM> model, std::shared_ptr<const Vocabulary> vocab);

  CapabilitySet capabilities() const override {
    return {Capability::kLogits, Capability::kTopLogprobs, Capability::kSample,
            Capability::kTokenGradient};
  }
  const Vocabulary& vocabulary() const override { return *vocab_; }
  std::string id() const override { return model_->id(); }
  std::size_t max_prompt_length() const override { return model_->max_prompt_length(); }

  LogitVector first_token_logits(TokenSpan prompt) const override;
  std::vector<std::vector<double>> logit_vjp(TokenSpan prompt, std::size_t first_position,
                                             std::span<const double> dlogits) const override;
  std::unique_ptr<SubstitutionEvaluator> substitution_evaluator(TokenSpan prompt) const override;

  const ToyLM& model() const { return *model_; }
  std::shared_ptr<const ToyLM> model_ptr() const { return model_; }
  std::shared_ptr<const Vocabulary> vocabulary_ptr() const { return vocab_; }

 private:
  std::shared_ptr<const ToyLM> model_;
  std::shared_ptr<const Vocabulary> vocab_;
};

}  // namespace llmprint
