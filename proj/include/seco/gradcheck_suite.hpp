#pragma once

#include <string>

namespace seco {

struct GradCheckSuiteResult {
    bool pass = false;
    int targets = 0;
    int failed = 0;
    std::string report;
};

// Finite-difference validation of every loss through the query path: each
// loss w.r.t. a free query embedding, the encode-composed losses w.r.t. the
// full query-encoder weight set, and the order loss w.r.t. the classifier.
// `inject_fault` swaps in one deliberately corrupted backward rule to prove
// the checker catches it.
GradCheckSuiteResult run_gradcheck_suite(bool inject_fault);

}  // namespace seco
