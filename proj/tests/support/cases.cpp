#include "cases.hpp"

namespace shiftlab::testkit {

const std::vector<F1Case>& token_f1_table() {
    static const std::vector<F1Case> table = {
        {"tetanus", {"tetanus"}, 1.0},
        {"lockjaw", {"tetanus"}, 0.0},
        // P = 3/4, R = 3/3
        {"exposure to high altitude", {"High altitude exposure"}, 6.0 / 7.0},
        {"The Oval Office.", {"oval office"}, 1.0},
        {"", {"the"}, 1.0},
        {"", {"tetanus"}, 0.0},
        {"a", {"an"}, 1.0},
        {"oval", {"Oval Office"}, 2.0 / 3.0},
        {"Oval Office tunnel", {"Oval Office"}, 0.8},
        {"new york city", {"New York"}, 0.8},
        {"york", {"New York", "York"}, 1.0},
        {"paris france", {"Paris", "Lyon"}, 2.0 / 3.0},
        {"the the cat", {"cat"}, 1.0},
        {"cat cat", {"cat"}, 2.0 / 3.0},
        {"cat dog", {"dog cat"}, 1.0},
        {"Dow Jones & Company", {"Dow Jones and Company"}, 6.0 / 7.0},
        {"1882", {"in 1882"}, 2.0 / 3.0},
        {"U.S.A.", {"USA"}, 1.0},
        {"Charles Henry Dow", {"Charles Dow"}, 0.8},
        {"w x y z", {"x y z q"}, 0.75},
        {"mixed integer programming", {"mixed integer linear programming"}, 6.0 / 7.0},
        {"Parkinson's disease", {"parkinsons disease"}, 1.0},
        {"yes", {"no"}, 0.0},
        {"red red blue", {"red blue blue"}, 2.0 / 3.0},
        {"an apple a day", {"The apple day"}, 1.0},
    };
    return table;
}

const std::string& filter_passage() {
    static const std::string passage =
        "Charles Henry Dow was an American journalist who co-founded Dow Jones and Company with Edward Jones and "
        "Charles Bergstresser. Dow also founded The Wall Street Journal, which has become one of the most respected "
        "financial publications in the world. He also invented the Dow Jones Industrial Average as part of his "
        "research into market movements.";
    return passage;
}

const std::vector<FilterCase>& filter_suite() {
    using R = augment::FilterReason;
    static const std::vector<FilterCase> suite = {
        {"number/founding-year",
         "Charles Henry Dow was an American journalist who founded The Wall Street Journal in 1882.",
         R::ContainsNumber},
        {"number/copied-sentence-with-year", "Dow also founded The Wall Street Journal in 1889.", R::ContainsNumber},
        {"number/count", "The Dow Jones Industrial Average had 12 stocks at first.", R::ContainsNumber},
        {"number/birth-year", "Charles Henry Dow was an American journalist born in 1851.", R::ContainsNumber},
        {"number/founders", "Dow Jones and Company had 3 founders.", R::ContainsNumber},
        {"number/single-digit", "Charles Henry Dow was an American journalist and 1 of the founders.",
         R::ContainsNumber},
        {"number/ordinal", "The 2nd founder was Edward Jones.", R::ContainsNumber},
        {"number/inside-verbatim",
         "Dow also founded The Wall Street Journal, which has become one of the 10 most respected financial "
         "publications.",
         R::ContainsNumber},
        {"number/breaks-every-rule", "Stock prices rose 5% on Monday.", R::ContainsNumber},
        {"number/decade",
         "He also invented the Dow Jones Industrial Average as part of his research into market movements in the "
         "1880s.",
         R::ContainsNumber},

        {"span/paraphrase", "Dow was a newspaper editor who loved financial data.", R::NoVerbatimSpan},
        {"span/reversed-words", "Journal Street Wall The founded also Dow.", R::NoVerbatimSpan},
        {"span/unrelated", "The cat sat on the mat today.", R::NoVerbatimSpan},
        {"span/reordered-names", "Charles Dow and Edward Jones started a company together.", R::NoVerbatimSpan},
        {"span/shuffled-founders", "Bergstresser, Jones and Dow co-founded a famous company.", R::NoVerbatimSpan},
        {"span/reversed-clause", "Financial publications respected most the of one become has which.",
         R::NoVerbatimSpan},
        {"span/four-token-run", "The Wall Street Journal is a newspaper.", R::NoVerbatimSpan},
        {"span/four-token-name", "Dow Jones Industrial Average rose sharply.", R::NoVerbatimSpan},
        {"span/scattered-words", "Market movements were studied by Dow in his research.", R::NoVerbatimSpan},
        {"span/article-differs", "Charles Henry Dow was a journalist.", R::NoVerbatimSpan},

        {"overlap/typography",
         "Dow also founded The Wall Street Journal, although critics mocked its cramped pages and bland typography.",
         R::LowOverlap},
        {"overlap/hobbies", "Charles Henry Dow was an eccentric collector of rare butterflies and antique clocks.",
         R::LowOverlap},
        {"overlap/pundits",
         "He also invented the Dow Jones Industrial Average, a gauge beloved by pundits, gamblers and dreamers "
         "everywhere.",
         R::LowOverlap},
        {"overlap/poetry", "Respected financial publications in the world rarely print poetry or crossword puzzles.",
         R::LowOverlap},
        {"overlap/cousin",
         "Co-founded Dow Jones and Company with Edward Jones and his cousin, a Vermont farmer fond of oysters.",
         R::LowOverlap},
        {"overlap/astronomy",
         "As part of his research into comets, Dow built telescopes and sketched lunar craters.", R::LowOverlap},
        {"overlap/gossip",
         "The most respected financial publications ignore gossip, fashion, recipes and horoscopes.", R::LowOverlap},
        {"overlap/surfers",
         "Wall Street Journal, which has become popular among surfers, skaters and teenage musicians.",
         R::LowOverlap},
        {"overlap/bakery", "An American journalist who co-founded a bakery sold bagels, muffins and pretzels.",
         R::LowOverlap},
        {"overlap/carnival", "Industrial Average as part of a carnival game involving llamas and confetti.",
         R::LowOverlap},
    };
    return suite;
}

} // namespace shiftlab::testkit
