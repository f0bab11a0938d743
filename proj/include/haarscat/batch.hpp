#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace haarscat {

/// count x dim samples, row-major.
class SignalBatch {
public:
    SignalBatch() = default;
    SignalBatch(std::size_t count, std::size_t dim) : count_(count), dim_(dim), values_(count * dim) {}
    SignalBatch(std::size_t count, std::size_t dim, std::vector<double> values);

    std::size_t count() const noexcept { return count_; }
    std::size_t dim() const noexcept { return dim_; }
    bool empty() const noexcept { return count_ == 0; }

    std::span<const double> row(std::size_t i) const { return {values_.data() + i * dim_, dim_}; }
    std::span<double> row(std::size_t i) { return {values_.data() + i * dim_, dim_}; }

    const std::vector<double>& values() const noexcept { return values_; }
    std::vector<double>& values() noexcept { return values_; }

    /// Rows listed in `rows`, in that order.
    SignalBatch select(std::span<const std::size_t> rows) const;

    friend bool operator==(const SignalBatch&, const SignalBatch&) = default;

private:
    std::size_t count_ = 0;
    std::size_t dim_ = 0;
    std::vector<double> values_;
};

}  // namespace haarscat
