#include "truncscore/step_function.hpp"

#include <algorithm>
#include <stdexcept>
#include <utility>

namespace truncscore {

StepFunction::StepFunction(std::vector<double> times, std::vector<double> values,
                           double initial_value)
    : times_(std::move(times)), values_(std::move(values)), initial_(initial_value) {
    if (times_.size() != values_.size())
        throw std::invalid_argument("StepFunction: times/values length mismatch");
    for (std::size_t i = 1; i < times_.size(); ++i)
        if (!(times_[i - 1] < times_[i]))
            throw std::invalid_argument("StepFunction: jump times must be strictly increasing");
}

double StepFunction::value_at(double t) const {
    // index of first jump time > t; the value in force is the one before it
    auto it = std::upper_bound(times_.begin(), times_.end(), t);
    if (it == times_.begin()) return initial_;
    return values_[static_cast<std::size_t>(it - times_.begin()) - 1];
}

double StepFunction::left_limit(double t) const {
    auto it = std::lower_bound(times_.begin(), times_.end(), t);
    if (it == times_.begin()) return initial_;
    return values_[static_cast<std::size_t>(it - times_.begin()) - 1];
}

} // namespace truncscore
