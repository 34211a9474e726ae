#ifndef TRUNCSCORE_STEP_FUNCTION_HPP
#define TRUNCSCORE_STEP_FUNCTION_HPP

#include <vector>

namespace truncscore {

// Right-continuous step function with an initial value before the first jump.
// Used for survival curves, cumulative hazards and baseline hazards, where
// left limits at jump times matter (censoring weights are evaluated at t-).
class StepFunction {
  public:
    StepFunction() = default;
    // times must be strictly increasing; values[i] is the value on
    // [times[i], times[i+1]).
    StepFunction(std::vector<double> times, std::vector<double> values,
                 double initial_value);

    // Value at t (right-continuous: jumps are attained at their time).
    double value_at(double t) const;
    // Left limit at t: the value just before t.
    double left_limit(double t) const;

    const std::vector<double>& times() const { return times_; }
    const std::vector<double>& values() const { return values_; }
    double initial_value() const { return initial_; }

  private:
    std::vector<double> times_;
    std::vector<double> values_;
    double initial_ = 0.0;
};

} // namespace truncscore

#endif
