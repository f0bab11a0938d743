#include "haarscat/batch.hpp"

#include <algorithm>

#include "haarscat/error.hpp"

namespace haarscat {

SignalBatch::SignalBatch(std::size_t count, std::size_t dim, std::vector<double> values)
    : count_(count), dim_(dim), values_(std::move(values)) {
    require(values_.size() == count * dim, ErrorKind::ShapeMismatch, "batch buffer size != count * dim");
}

SignalBatch SignalBatch::select(std::span<const std::size_t> rows) const {
    SignalBatch out(rows.size(), dim_);
    for (std::size_t r = 0; r < rows.size(); ++r) {
        require(rows[r] < count_, ErrorKind::IndexOutOfRange, "row index outside batch");
        std::copy_n(values_.begin() + static_cast<std::ptrdiff_t>(rows[r] * dim_), dim_,
                    out.values_.begin() + static_cast<std::ptrdiff_t>(r * dim_));
    }
    return out;
}

}  // namespace haarscat
