#pragma once

// Mutation hooks: every transcribed rational constant in the model builders
// is routed through a Mutator, so the verification engine can perturb single
// coefficients and confirm the symbolic identities notice.

#include "hampert/rational.hpp"

#include <string>
#include <utility>
#include <vector>

namespace hampert {

class Mutator {
public:
    virtual ~Mutator() = default;
    // Called for every transcribed rational constant; returns the value to use.
    virtual Rat coef(const std::string& site, const Rat& value) = 0;
};

// Records every (site, value) pair, for enumerating mutation targets.
class CollectingMutator : public Mutator {
public:
    std::vector<std::pair<std::string, Rat>> seen;
    Rat coef(const std::string& site, const Rat& value) override {
        seen.emplace_back(site, value);
        return value;
    }
};

// Scales the index-th constant encountered within `site` by `factor`.
class ScaleNthMutator : public Mutator {
public:
    ScaleNthMutator(std::string site, std::size_t index, const Rat& factor)
        : site_(std::move(site)), index_(index), factor_(factor) {}
    bool hit = false;
    Rat coef(const std::string& site, const Rat& value) override {
        if (site != site_) return value;
        if (count_++ != index_) return value;
        hit = true;
        return value * factor_;
    }

private:
    std::string site_;
    std::size_t index_;
    Rat factor_;
    std::size_t count_ = 0;
};

// Scales every constant within `site` whose magnitude equals `value`.
class ScaleValueMutator : public Mutator {
public:
    ScaleValueMutator(std::string site, const Rat& value, const Rat& factor)
        : site_(std::move(site)), value_(value), factor_(factor) {}
    bool hit = false;
    Rat coef(const std::string& site, const Rat& value) override {
        if (site != site_ || (value != value_ && value != -value_)) return value;
        hit = true;
        return value * factor_;
    }

private:
    std::string site_;
    Rat value_, factor_;
};

namespace mutation_detail {
inline Rat mut(Mutator* m, const std::string& site, long long num, long long den = 1) {
    Rat v(num, den);
    return m ? m->coef(site, v) : v;
}
}  // namespace mutation_detail

}  // namespace hampert
