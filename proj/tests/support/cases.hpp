#pragma once

#include "shiftlab/augmentation.hpp"

#include <string>
#include <vector>

namespace shiftlab::testkit {

struct F1Case {
    std::string prediction;
    std::vector<std::string> golds;
    double expected;
};

/// Token F1 values worked out by hand from token multisets.
const std::vector<F1Case>& token_f1_table();

struct FilterCase {
    std::string name;
    std::string generated;
    augment::FilterReason expected;
};

/// Passage shared by every filter case.
const std::string& filter_passage();

/// Ten generations per rejection reason, each rejected for the first rule it
/// breaks.
const std::vector<FilterCase>& filter_suite();

} // namespace shiftlab::testkit
