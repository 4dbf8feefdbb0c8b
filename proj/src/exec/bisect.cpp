#include <map>

#include "qorpilot/exec/executor.hpp"

namespace qorpilot::exec {

BisectResult bisect(size_t n, const std::function<bool(size_t)>& prefix_passes) {
    if (n == 0) throw Error("bisect over an empty diff list");

    BisectResult result;
    std::map<size_t, bool> observed;
    size_t max_pass = 0;          // prefix 0 passes (precondition)
    size_t min_fail = n + 1;      // prefix n fails (precondition, verified lazily)

    auto eval = [&](size_t len) {
        auto it = observed.find(len);
        if (it != observed.end()) return it->second;
        ++result.probes;
        bool pass = prefix_passes(len);
        observed.emplace(len, pass);
        if (pass) {
            if (len >= min_fail)
                throw PredicateInconsistent(
                    "prefix " + std::to_string(len) + " passes although prefix " +
                    std::to_string(min_fail) + " failed");
            max_pass = std::max(max_pass, len);
        } else {
            if (len <= max_pass)
                throw PredicateInconsistent(
                    "prefix " + std::to_string(len) + " fails although prefix " +
                    std::to_string(max_pass) + " passed");
            min_fail = std::min(min_fail, len);
        }
        return pass;
    };

    size_t lo = 0;  // known pass
    size_t hi = n;  // claimed fail
    while (hi - lo > 1) {
        size_t mid = lo + (hi - lo) / 2;
        if (eval(mid)) lo = mid;
        else hi = mid;
    }
    // verify the culprit when its failure was never observed
    if (!observed.count(hi) || observed.at(hi)) {
        if (eval(hi))
            throw PredicateInconsistent("prefix " + std::to_string(hi) +
                                        " passes although the full prefix was declared failing");
    }
    result.culprit = hi;
    return result;
}

}  // namespace qorpilot::exec
