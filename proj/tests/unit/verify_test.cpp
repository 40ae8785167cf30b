#include <doctest.h>

#include <cmath>

#include "fixtures.hpp"
#include "llmprint/construct/builder.hpp"
#include "llmprint/core/error.hpp"
#include "llmprint/verify/verify.hpp"
#include "oracles.hpp"

using namespace llmprint;
using namespace llmprint::verify;

namespace {

std::vector<double> logits_from_probs(std::size_t size, std::vector<std::pair<TokenId, double>> probs) {
  std::vector<double> z(size, -1000.0);
  for (auto [id, p] : probs) z[id] = std::log(p);
  return z;
}

TopLogprob listed(const Vocabulary& v, TokenId id, double lp) { return {v.surface(id), id, lp}; }

}  // namespace

TEST_CASE("reference bits follow z+ >= z-") {
  const auto vocab = test::tiny_vocab(6);
  const auto set = test::stub_set({test::pair_of(*vocab, 2, 3), test::pair_of(*vocab, 4, 5),
                                   test::pair_of(*vocab, 3, 4)});
  const auto stub = test::constant_backend(vocab, {0.0, 0.0, 1.0, 1.0, 0.5, 2.0});
  // 2 vs 3 tie -> 1; 4 vs 5 -> 0; 3 vs 4 -> 1
  CHECK(reference_bits(*stub, set).to_string() == "101");
}

TEST_CASE("top-k bits under the literal rule") {
  const auto vocab = test::tiny_vocab(8);
  const TokenPair pair = test::pair_of(*vocab, 2, 3);
  CHECK(topk_bit({listed(*vocab, 5, -0.1)}, pair, AbsentPolicy::kLiteralZero) == 1);
  CHECK(topk_bit({listed(*vocab, 3, -1.2)}, pair, AbsentPolicy::kLiteralZero) == 1);
  CHECK(topk_bit({listed(*vocab, 2, -1.2)}, pair, AbsentPolicy::kLiteralZero) == 0);
  CHECK(topk_bit({listed(*vocab, 3, -0.5), listed(*vocab, 2, -1.5)}, pair, AbsentPolicy::kLiteralZero) == 0);
  CHECK(topk_bit({listed(*vocab, 2, -1.0), listed(*vocab, 3, -1.0)}, pair, AbsentPolicy::kLiteralZero) == 1);
}

TEST_CASE("top-k bits under the residual-mass rule") {
  const auto vocab = test::tiny_vocab(8);
  const TokenPair pair = test::pair_of(*vocab, 2, 3);
  // Only w- listed with p = 0.3: residual log(0.7) > log(0.3).
  CHECK(topk_bit({listed(*vocab, 3, std::log(0.3))}, pair, AbsentPolicy::kResidualMass) == 1);
  // w- listed with p = 0.8: residual log(0.2) < log(0.8).
  CHECK(topk_bit({listed(*vocab, 3, std::log(0.8))}, pair, AbsentPolicy::kResidualMass) == 0);
  CHECK(topk_bit({listed(*vocab, 5, std::log(0.9))}, pair, AbsentPolicy::kResidualMass) == 1);
}

TEST_CASE("malformed top-k lists are rejected") {
  const auto vocab = test::tiny_vocab(8);
  const TokenPair pair = test::pair_of(*vocab, 2, 3);
  CHECK_THROWS_AS(topk_bit({listed(*vocab, 2, 0.5)}, pair, AbsentPolicy::kLiteralZero), MalformedDistribution);
  CHECK_THROWS_AS(topk_bit({listed(*vocab, 2, NAN)}, pair, AbsentPolicy::kLiteralZero), MalformedDistribution);
  CHECK_THROWS_AS(topk_bit({listed(*vocab, 2, std::log(0.7)), listed(*vocab, 3, std::log(0.6))}, pair,
                           AbsentPolicy::kLiteralZero),
                  MalformedDistribution);
  CHECK_THROWS_AS(topk_bit({listed(*vocab, 2, -1.0), listed(*vocab, 2, -2.0)}, pair, AbsentPolicy::kLiteralZero),
                  MalformedDistribution);
}

TEST_CASE("surface matching when the id is unknown") {
  const auto vocab = test::tiny_vocab(8);
  const TokenPair pair = test::pair_of(*vocab, 2, 3);
  const std::vector<TopLogprob> top{{"t1", std::nullopt, -0.3}, {"t0", std::nullopt, -2.0}};
  CHECK(topk_bit(top, pair, AbsentPolicy::kLiteralZero) == 0);
}

TEST_CASE("black-box bits") {
  const auto vocab = test::tiny_vocab(6);
  const auto set = test::stub_set({test::pair_of(*vocab, 2, 3)});
  VerifyConfig c;
  c.mode = Mode::kBlackBox;
  c.samples = 50;
  SUBCASE("always w+") {
    const auto stub = test::constant_backend(vocab, logits_from_probs(6, {{2, 1.0}}));
    const auto [bits, counts] = blackbox_bits(*stub, set, c);
    CHECK(bits.to_string() == "1");
    CHECK(counts[0].c_plus == 50);
    CHECK(counts[0].c_minus == 0);
  }
  SUBCASE("neither token is ever emitted") {
    const auto stub = test::constant_backend(vocab, logits_from_probs(6, {{5, 1.0}}));
    const auto [bits, counts] = blackbox_bits(*stub, set, c);
    CHECK(bits.to_string() == "1");
    CHECK(counts[0].c_plus + counts[0].c_minus == 0);
  }
  SUBCASE("seeded and reproducible") {
    const auto stub = test::constant_backend(vocab, logits_from_probs(6, {{2, 0.4}, {3, 0.4}, {4, 0.2}}));
    c.seed = 5;
    CHECK(blackbox_bits(*stub, set, c).second[0].c_plus == blackbox_bits(*stub, set, c).second[0].c_plus);
  }
}

TEST_CASE("black-box bit concentrates as the binomial tail predicts") {
  const auto vocab = test::tiny_vocab(6);
  const auto set = test::stub_set({test::pair_of(*vocab, 2, 3)});
  const auto stub = test::constant_backend(vocab, logits_from_probs(6, {{2, 0.6}, {3, 0.3}, {4, 0.1}}));
  VerifyConfig c;
  c.mode = Mode::kBlackBox;
  c.samples = 100;
  std::size_t ones = 0;
  for (std::uint64_t rep = 0; rep < 1000; ++rep) {
    c.seed = rep;
    ones += blackbox_bits(*stub, set, c).first[0];
  }
  const double predicted = test::tie_rule_bit_probability(100, 0.6, 0.3);
  CHECK(predicted >= 0.999);
  CHECK(static_cast<double>(ones) / 1000.0 >= 0.999);
}

TEST_CASE("calibration over stub negatives") {
  const auto vocab = test::tiny_vocab(8);
  const auto set = test::stub_set({test::pair_of(*vocab, 2, 7), test::pair_of(*vocab, 3, 6),
                                   test::pair_of(*vocab, 4, 5), test::pair_of(*vocab, 7, 3)},
                                  1);
  const auto a = test::constant_backend(vocab, {0, 0, 2, 1, 0, 0, 1, 2}, "a");
  const auto b = test::constant_backend(vocab, {0, 0, 0, 0, 0, 0, 0, 0}, "b");
  const auto c = test::constant_backend(vocab, {0, 0, 0, 0, 0, 0, 5, 5}, "c");
  VerifyConfig config;
  const auto model = calibrate(set.reference_bits(), set, {a.get(), b.get(), c.get()}, config);
  // a agrees everywhere, b ties everywhere, c loses the first two pairs

  CHECK(model.validation_accuracies() == std::vector<double>{1.0, 1.0, 0.5});
  CHECK(model.mode() == "grayfull");
  CHECK_THROWS_AS(calibrate(set.reference_bits(), set, {a.get()}, config), InvalidArgument);
}

TEST_CASE("end-to-end verification on toy models") {
  const auto vocab = test::tiny_vocab(40);
  const auto base = test::tiny_toy(vocab, 1);
  std::vector<TokenPair> pairs;
  for (TokenId i = 0; i < 30; ++i) pairs.push_back(test::pair_of(*vocab, 2 + i, 39 - i % 8));
  construct::ConstructionConfig cc;
  cc.suffix_length = 4;
  cc.iterations = 3;
  cc.batch_size = 8;
  cc.init_token = "t0";
  const auto built = construct::build_fingerprints(*base, pairs, {2, 3}, cc);
  REQUIRE(built.set);
  const auto& set = *built.set;
  std::vector<std::shared_ptr<const ToyBackend>> negatives;
  std::vector<const ModelBackend*> validation;
  for (std::uint64_t s = 0; s < 5; ++s) negatives.push_back(test::tiny_toy(vocab, 500 + s));
  for (const auto& n : negatives) validation.push_back(n.get());

  CHECK(reference_bits(*base, set) == set.reference_bits());
  VerifyConfig config;
  const auto self = verify::verify(*base, *base, set, validation, config);
  CHECK(self.accuracy == 1.0);
  CHECK(self.reference == self.predicted);

  config.mode = Mode::kBlackBox;
  const auto cal = calibrate(set.reference_bits(), set, validation, VerifyConfig{});
  CHECK_THROWS_AS(verify_with(set.reference_bits(), *base, set, cal, config), StageError);
  try {
    (void)verify::verify(*base, *base, set, {validation[0]}, config);
    FAIL("expected StageError");
  } catch (const StageError& e) {
    CHECK(e.stage() == "calibration");
  }
}

TEST_CASE("verify config validation") {
  VerifyConfig c;
  c.top_k = 0;
  CHECK_THROWS_AS(c.validate(), InvalidArgument);
  c = VerifyConfig{};
  c.samples = 0;
  CHECK_THROWS_AS(c.validate(), InvalidArgument);
  c = VerifyConfig{};
  c.temperature = -1.0;
  CHECK_THROWS_AS(c.validate(), InvalidArgument);
  CHECK(parse_mode("graytopk") == Mode::kGrayTopK);
  CHECK(to_string(Mode::kBlackBox) == "blackbox");
  CHECK_THROWS_AS(parse_mode("whitebox"), InvalidArgument);
}
