#include "llmprint/pairs/catalog.hpp"

#include <set>
#include <sstream>
#include <unordered_set>

#include "llmprint/core/error.hpp"

namespace llmprint::pairs {
namespace {

std::vector<std::string> split(const char* words) {
  std::vector<std::string> out;
  std::istringstream in(words);
  std::string w;
  while (in >> w) out.push_back(w);
  return out;
}

std::vector<Category> standard_categories() {
  const std::pair<const char*, const char*> lists[] = {
      {"animals",
       "cat dog lion tiger wolf bear horse donkey sheep goat rat mouse pig fox bull frog crow swan "
       "crane whale"},
      {"fruits",
       "apple pear peach plum fig date lime lemon mango melon grape guava berry cherry papaya "
       "banana kiwi orange lychee apricot"},
      {"vegetables",
       "carrot onion garlic pepper chili radish beet cabbage lettuce spinach broccoli zucchini "
       "cucumber leek turnip pumpkin squash pea corn celery"},
      {"colors",
       "red blue green yellow white black orange purple brown silver gray gold beige pink teal "
       "navy maroon lime cyan violet"},
      {"countries",
       "france italy spain germany greece turkey brazil canada japan china india nepal kenya "
       "uganda rwanda egypt norway sweden poland ireland"},
      {"languages",
       "english french spanish italian german russian arabic hebrew hindi bengali polish turkish "
       "swahili portuguese chinese japanese korean thai vietnamese dutch"},
      {"vehicles",
       "car bus truck train plane ship bike scooter yacht ferry tram taxi canoe kayak glider "
       "rocket subway rickshaw sedan coupe"},
      {"body parts",
       "head arm leg foot hand ear eye nose mouth back chest hip brow cheek chin lip tooth tongue "
       "knee elbow"},
      {"clothing",
       "shirt pants dress skirt coat hat sock shoe glove tie belt scarf hoodie jacket sweater bra "
       "brief short apron visor"},
      {"technology",
       "phone laptop tablet router modem camera printer scanner keyboard mouse joystick console "
       "monitor speaker headset charger battery cable remote server"},
      {"drinks",
       "water soda juice coffee tea beer wine whisky vodka latte cocoa mocha cider tonic lager "
       "sake mead punch rum cola"},
      {"sports",
       "soccer tennis rugby hockey boxing racing skiing surfing golf cricket fencing archery "
       "bowling cycling judo karate wrestling polo diving badminton"},
      {"furniture",
       "table chair sofa couch shelf desk bed stool cabinet dresser closet bench cupboard cradle "
       "hammock ottoman sideboard vanity bookcase wardrobe"},
      {"stationery",
       "pen pencil ruler eraser paper notebook marker binder envelope folder stapler scissors "
       "highlighter sharpener chalk card clip staple label crayon"},
      {"musical instruments",
       "piano guitar violin cello trumpet trombone saxophone clarinet flute harp drum horn oboe "
       "bassoon banjo organ tuba bugle lyre mandolin"},
      {"shapes",
       "circle square triangle rectangle diamond pentagon hexagon octagon cylinder sphere cube "
       "cone torus rhombus trapezoid ellipse polygon oval star cross"},
      {"music genres",
       "rock pop jazz blues reggae techno hiphop funk disco metal country gospel opera trance "
       "house swing rap soul folk edm"},
      {"programming languages",
       "python java javascript csharp ruby php swift kotlin rust go typescript fortran cobol julia "
       "dart clojure scala perl groovy haskell"},
      {"flowers",
       "rose lily tulip daisy orchid iris violet poppy peony marigold hyacinth lavender carnation "
       "begonia sunflower dahlia zinnia aster cosmos jasmine"},
      {"occupations",
       "doctor lawyer teacher pilot nurse farmer writer actor singer dancer soldier tailor chef "
       "barber driver baker guard clerk banker painter"},
  };
  std::vector<Category> out;
  for (const auto& [name, words] : lists) out.push_back({name, split(words)});
  return out;
}

}  // namespace

CategoryCatalog::CategoryCatalog(std::vector<Category> categories)
    : categories_(std::move(categories)) {
  if (categories_.empty()) throw InvalidArgument("category catalog is empty");
  std::set<std::string> names;
  for (const auto& c : categories_) {
    if (!names.insert(c.name).second) throw InvalidArgument("duplicate category '" + c.name + "'");
    if (c.words.empty()) throw InvalidArgument("category '" + c.name + "' has no words");
    std::unordered_set<std::string> seen;
    for (const auto& w : c.words) {
      if (w.empty()) throw InvalidArgument("category '" + c.name + "' has an empty word");
      if (!seen.insert(w).second) {
        throw InvalidArgument("category '" + c.name + "' repeats '" + w + "'");
      }
    }
  }
}

const CategoryCatalog& CategoryCatalog::standard() {
  static const CategoryCatalog catalog(standard_categories());
  return catalog;
}

std::vector<std::string> CategoryCatalog::unique_words() const {
  std::vector<std::string> out;
  std::unordered_set<std::string> seen;
  for (const auto& c : categories_) {
    for (const auto& w : c.words) {
      if (seen.insert(w).second) out.push_back(w);
    }
  }
  return out;
}

CategoryCatalog CategoryCatalog::subset(const std::vector<std::string>& names) const {
  std::vector<Category> out;
  for (const auto& n : names) {
    bool found = false;
    for (const auto& c : categories_) {
      if (c.name == n) {
        out.push_back(c);
        found = true;
        break;
      }
    }
    if (!found) throw InvalidArgument("unknown category '" + n + "'");
  }
  return CategoryCatalog(std::move(out));
}

std::shared_ptr<const Vocabulary> make_toy_vocabulary(const CategoryCatalog& catalog) {
  std::vector<std::string> surfaces = {std::string(Vocabulary::kBos), std::string(Vocabulary::kEos),
                                       std::string(Vocabulary::kUnk)};
  std::unordered_set<std::string> seen(surfaces.begin(), surfaces.end());
  auto add = [&](const std::string& s) {
    if (seen.insert(s).second) surfaces.push_back(s);
  };
  for (char c = 'a'; c <= 'z'; ++c) add(std::string(1, c));
  std::istringstream in(kDefaultInstruction);
  std::string w;
  while (in >> w) add(w);
  for (const auto& word : catalog.unique_words()) add(word);
  return std::make_shared<const Vocabulary>(
      std::move(surfaces),
      std::vector<std::string>{std::string(Vocabulary::kBos), std::string(Vocabulary::kEos),
                               std::string(Vocabulary::kUnk)});
}

}  // namespace llmprint::pairs
