#include <doctest.h>

#include <cmath>

#include "fixtures.hpp"
#include "llmprint/core/bitstring.hpp"
#include "llmprint/core/calibration.hpp"
#include "llmprint/core/error.hpp"
#include "llmprint/core/serialize.hpp"
#include "llmprint/core/vocabulary.hpp"

using namespace llmprint;

TEST_CASE("bitwise accuracy examples") {
  CHECK(bitwise_accuracy(BitString::from_string("1010"), BitString::from_string("1010")) == 1.0);
  CHECK(bitwise_accuracy(BitString::from_string("1111"), BitString::from_string("0000")) == 0.0);
  CHECK(bitwise_accuracy(BitString::from_string("1010"), BitString::from_string("1000")) == 0.75);
  CHECK_THROWS_AS(bitwise_accuracy(BitString{1, 0}, BitString{1}), LengthMismatch);
  CHECK_THROWS_AS(bitwise_accuracy(BitString{}, BitString{}), InvalidArgument);
}

TEST_CASE("bit strings hold only zeros and ones") {
  CHECK_THROWS_AS(BitString::from_string("102"), InvalidArgument);
  CHECK_THROWS_AS(BitString(std::vector<std::uint8_t>{0, 2}), InvalidArgument);
  const auto b = BitString::from_string("0110");
  CHECK(b.complement().to_string() == "1001");
  CHECK(b.count_ones() == 2);
  CHECK(bitwise_accuracy(b, b.complement()) == 0.0);
}

TEST_CASE("calibration arithmetic") {
  SUBCASE("three accuracies with the k-1 divisor") {
    const auto c = CalibrationModel::fit({0.48, 0.50, 0.52}, 1.64);
    CHECK(c.mu() == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(c.sigma() == doctest::Approx(0.02).epsilon(1e-12));
    CHECK(std::abs(c.tau() - 0.5328) <= 1e-12);
    CHECK(c.tau() == c.mu() + c.z() * c.sigma());
    CHECK(c.k() == 3);
  }
  SUBCASE("zero spread gives tau = mu") {
    const auto c = CalibrationModel::fit({0.5, 0.5, 0.5, 0.5}, 1.64);
    CHECK(c.sigma() == 0.0);
    CHECK(c.tau() == 0.5);
  }
  SUBCASE("needs two accuracies in [0, 1]") {
    CHECK_THROWS_AS(CalibrationModel::fit({0.5}, 1.64), InvalidArgument);
    CHECK_THROWS_AS(CalibrationModel::fit({0.5, 1.5}, 1.64), InvalidArgument);
  }
}

TEST_CASE("decision at and around the threshold") {
  const auto c = CalibrationModel::fit({0.48, 0.50, 0.52}, 1.64);
  CHECK(decide(c.tau(), c).positive());
  CHECK(decide(1.0, c).positive());
  CHECK_FALSE(decide(0.5, c).positive());
  CHECK_FALSE(decide(std::nextafter(c.tau(), 0.0), c).positive());
}

TEST_CASE("calibration restore checks tau") {
  const auto c = CalibrationModel::fit({0.4, 0.45, 0.6}, 1.64, "grayfull");
  const auto back = deserialize_calibration(serialize(c));
  CHECK(back == c);
  CHECK(serialize(back) == serialize(c));
  auto doc = to_json(c);
  doc["tau"] = c.tau() + 0.01;
  CHECK_THROWS_AS(calibration_from_json(doc), FormatError);
}

TEST_CASE("fingerprint set invariants and round trip") {
  const auto vocab = test::tiny_vocab(8);
  const auto set = test::stub_set({test::pair_of(*vocab, 2, 3), test::pair_of(*vocab, 4, 5)});
  SUBCASE("canonical documents round trip") {
    const std::string text = serialize(set);
    CHECK(deserialize_fingerprints(text) == set);
    CHECK(serialize(deserialize_fingerprints(text)) == text);
  }
  SUBCASE("empty entry list is rejected on load") {
    auto doc = to_json(set);
    doc["entries"] = nlohmann::json::array();
    CHECK_THROWS_AS(fingerprint_set_from_json(doc), FormatError);
  }
  SUBCASE("reference bit 2 is rejected on load") {
    auto doc = to_json(set);
    doc["entries"][0]["reference_bit"] = 2;
    CHECK_THROWS_AS(fingerprint_set_from_json(doc), FormatError);
  }
  SUBCASE("repeated unordered pair is rejected") {
    CHECK_THROWS_AS(test::stub_set({test::pair_of(*vocab, 2, 3), test::pair_of(*vocab, 3, 2)}),
                    InvalidArgument);
  }
  SUBCASE("prefix keeps order") {
    const auto p = set.prefix(1);
    CHECK(p.size() == 1);
    CHECK(p[0] == set[0]);
    CHECK_THROWS_AS(set.prefix(0), InvalidArgument);
  }
}

TEST_CASE("pair lists round trip") {
  const auto vocab = test::tiny_vocab(8);
  const std::vector<TokenPair> pairs{test::pair_of(*vocab, 2, 3), test::pair_of(*vocab, 7, 4)};
  CHECK(pair_list_from_json(pair_list_to_json(pairs)) == pairs);
  auto doc = pair_list_to_json(pairs);
  doc["pairs"][0]["negative"]["id"] = 2;
  CHECK_THROWS_AS(pair_list_from_json(doc), FormatError);
}

TEST_CASE("vocabulary tokenization") {
  const Vocabulary v({"<bos>", "<unk>", "cat", "c", "a", "t"}, {"<bos>", "<unk>"});
  CHECK(v.tokenize("cat") == TokenSequence{2});
  CHECK(v.tokenize("  cat   tac ") == TokenSequence{2, 5, 4, 3});
  CHECK(v.tokenize("cz") == TokenSequence{3, 1});
  CHECK(v.render(TokenSequence{2, 2}) == "cat cat");
  CHECK(v.ordinary_ids() == std::vector<TokenId>{2, 3, 4, 5});
  CHECK(v.bos() == TokenId{0});
  CHECK_THROWS_AS(Vocabulary({"a", "a"}, {}), InvalidArgument);
}
