#pragma once

#include <span>
#include <string>
#include <vector>

namespace matchlab {

struct RougeScore {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
};

// ROUGE-1/2/L plus the mean of the three F1 values, which is the scalar every
// sentence- and summary-level score in this project is built from.
struct RougeTriple {
    RougeScore r1;
    RougeScore r2;
    RougeScore rl;
    double mean_f1 = 0.0;
};

using TokenList = std::vector<std::string>;
using TokenView = std::span<const std::string>;

// Clipped n-gram overlap: matched count per distinct n-gram is
// min(candidate count, reference count). Either side having zero n-grams
// (too short or empty) yields all-zero components. Requires n >= 1.
RougeScore rouge_n(TokenView candidate, TokenView reference, int n);

// LCS over the flattened token sequences: precision = lcs/|candidate|,
// recall = lcs/|reference|. Empty side yields zeros.
RougeScore rouge_l(TokenView candidate, TokenView reference);

RougeTriple mean_rouge(TokenView candidate, TokenView reference);

std::size_t lcs_length(TokenView a, TokenView b);

}  // namespace matchlab
