#pragma once

// Reference implementations used only by tests. They follow the textbook
// definitions directly and share no code with the library.

#include <cstddef>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace shiftlab::testkit {

struct OracleDoc {
    std::string id;
    std::vector<std::string> tokens;
};

/// Okapi BM25 of one document, scanning every document for df and length.
double oracle_bm25(const std::vector<OracleDoc>& docs, const std::vector<std::string>& query, std::size_t doc,
                   double k1, double b);

/// Full scoring of every document, sorted by descending score then id.
std::vector<std::pair<std::string, double>> oracle_rank(const std::vector<OracleDoc>& docs,
                                                        const std::vector<std::string>& query, std::size_t k,
                                                        double k1, double b);

/// 1/2 sum |p - q| accumulated in long double.
long double oracle_tv(const std::vector<double>& p, const std::vector<double>& q);

/// Whitespace-token window search of a normalized answer inside a normalized
/// passage.
bool oracle_contains(const std::string& normalized_passage, const std::string& normalized_answer);

/// Upper tail P(X >= x) of a chi-square distribution with `df` degrees of
/// freedom.
double chi_square_sf(double x, std::size_t df);

/// Pearson statistic and p-value of observed counts against expected
/// probabilities.
std::pair<double, double> chi_square_test(const std::vector<std::size_t>& observed,
                                          const std::vector<double>& probabilities);

} // namespace shiftlab::testkit
