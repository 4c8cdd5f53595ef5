#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace mlpmc {

// Refusal issued before any sampling when the predicted draw count exceeds
// the authorized budget (or overflows the counter). Estimates are refused
// rather than truncated so cost claims stay honest.
class BudgetError : public std::runtime_error {
public:
    BudgetError(double predicted_draws, std::uint64_t cap)
        : std::runtime_error("budget refusal: predicted " + std::to_string(predicted_draws) +
                             " scalar draws exceeds cap " + std::to_string(cap)),
          predicted_(predicted_draws) {}

    explicit BudgetError(const std::string& what, double predicted_draws)
        : std::runtime_error(what), predicted_(predicted_draws) {}

    [[nodiscard]] double predicted_draws() const { return predicted_; }

private:
    double predicted_;
};

// Malformed configuration input; carries the offending key.
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace mlpmc
