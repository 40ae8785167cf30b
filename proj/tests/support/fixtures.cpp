#include "fixtures.hpp"

#include <string>

namespace llmprint::test {

std::shared_ptr<const Vocabulary> tiny_vocab(std::size_t size) {
  std::vector<std::string> surfaces{"<bos>", "<eos>"};
  for (std::size_t i = 0; surfaces.size() < size; ++i) surfaces.push_back("t" + std::to_string(i));
  return std::make_shared<const Vocabulary>(surfaces, std::vector<std::string>{"<bos>", "<eos>"});
}

TokenPair pair_of(const Vocabulary& vocab, TokenId positive, TokenId negative) {
  return {vocab.token(positive), vocab.token(negative), "test"};
}

ToyConfig tiny_config(const Vocabulary& vocab, std::size_t width, std::size_t context) {
  ToyConfig c = toy_config_for(vocab);
  c.hidden_width = width;
  c.context_length = context;
  return c;
}

std::shared_ptr<const ToyBackend> tiny_toy(std::shared_ptr<const Vocabulary> vocab,
                                           std::uint64_t seed, std::size_t width,
                                           std::size_t context) {
  auto model = std::make_shared<const ToyLM>(ToyLM::init(tiny_config(*vocab, width, context), seed));
  return std::make_shared<const ToyBackend>(model, std::move(vocab));
}

std::shared_ptr<const FunctionBackend> constant_backend(std::shared_ptr<const Vocabulary> vocab,
                                                        std::vector<double> logits,
                                                        std::string id) {
  return std::make_shared<const FunctionBackend>(
      std::move(vocab), [logits](TokenSpan) { return logits; }, std::move(id));
}

FingerprintSet stub_set(const std::vector<TokenPair>& pairs, std::uint8_t bit) {
  std::vector<FingerprintEntry> entries;
  for (const auto& p : pairs) {
    FingerprintEntry e;
    e.pair = p;
    e.prompt.base_instruction = {2};
    e.prompt.suffix = {3};
    e.reference_bit = bit;
    entries.push_back(std::move(e));
  }
  return FingerprintSet(std::move(entries));
}

}  // namespace llmprint::test
