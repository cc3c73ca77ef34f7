#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace mmd {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Raised when an enumeration or product outgrows its configured budget.
class BudgetExceeded : public Error {
public:
    BudgetExceeded(const std::string& what, std::size_t partial)
        : Error(what), partial_(partial) {}

    std::size_t partial() const { return partial_; }

private:
    std::size_t partial_;
};

}  // namespace mmd
