#include "tubeflow/trajectory.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace tubeflow {

namespace {

void check_breakpoints(const std::vector<double>& bp, std::size_t piece_count,
                       const char* what) {
  if (bp.size() != piece_count + 1)
    throw std::invalid_argument(std::string(what) + ": breakpoint/piece count mismatch");
  for (std::size_t i = 0; i + 1 < bp.size(); ++i) {
    if (!(bp[i] < bp[i + 1]))
      throw std::invalid_argument(std::string(what) + ": breakpoints not increasing");
  }
  for (double b : bp)
    if (!std::isfinite(b))
      throw std::invalid_argument(std::string(what) + ": non-finite breakpoint");
}

}  // namespace

Trajectory::Trajectory(std::vector<double> times, std::vector<Eigen::VectorXd> states)
    : times_(std::move(times)), states_(std::move(states)) {
  if (times_.size() != states_.size() || times_.empty())
    throw std::invalid_argument("Trajectory: times/states size mismatch");
  for (std::size_t i = 0; i + 1 < times_.size(); ++i)
    if (!(times_[i] < times_[i + 1]))
      throw std::invalid_argument("Trajectory: time grid not increasing");
  for (const Eigen::VectorXd& s : states_)
    if (s.size() != states_[0].size())
      throw std::invalid_argument("Trajectory: inconsistent state dimension");
}

Eigen::VectorXd Trajectory::at(double t) const {
  double span = std::max(1.0, times_.back() - times_.front());
  if (t < times_.front() - 1e-9 * span || t > times_.back() + 1e-9 * span)
    throw std::out_of_range("Trajectory::at: time " + std::to_string(t) +
                            " outside [" + std::to_string(times_.front()) + ", " +
                            std::to_string(times_.back()) + "]");
  if (t <= times_.front()) return states_.front();
  if (t >= times_.back()) return states_.back();
  auto it = std::upper_bound(times_.begin(), times_.end(), t);
  std::size_t j = static_cast<std::size_t>(it - times_.begin());
  double t0 = times_[j - 1], t1 = times_[j];
  double w = (t - t0) / (t1 - t0);
  return (1.0 - w) * states_[j - 1] + w * states_[j];
}

double Trajectory::max_norm() const {
  double m = 0.0;
  for (const Eigen::VectorXd& s : states_) m = std::max(m, s.norm());
  return m;
}

int interval_index(const std::vector<double>& breakpoints, double t) {
  auto it = std::upper_bound(breakpoints.begin(), breakpoints.end(), t);
  long j = (it - breakpoints.begin()) - 1;
  j = std::clamp<long>(j, 0, static_cast<long>(breakpoints.size()) - 2);
  return static_cast<int>(j);
}

int SwitchingSignal::index_at(double t) const {
  return indices[interval_index(breakpoints, t)];
}

void SwitchingSignal::validate(int max_index) const {
  check_breakpoints(breakpoints, indices.size(), "SwitchingSignal");
  for (int i : indices) {
    if (i < 1 || (max_index > 0 && i > max_index))
      throw std::invalid_argument("SwitchingSignal: vertex index " + std::to_string(i) +
                                  " out of range");
  }
}

const std::vector<double>& RelaxedControl::weights_at(double t) const {
  return weights[interval_index(breakpoints, t)];
}

void RelaxedControl::validate(int vc) const {
  check_breakpoints(breakpoints, weights.size(), "RelaxedControl");
  for (const std::vector<double>& row : weights) {
    if (row.size() != weights[0].size() ||
        (vc > 0 && static_cast<int>(row.size()) != vc))
      throw std::invalid_argument("RelaxedControl: weight row size mismatch");
    double sum = 0.0;
    for (double w : row) {
      if (w < -1e-12)
        throw std::invalid_argument("RelaxedControl: negative weight");
      sum += w;
    }
    if (std::fabs(sum - 1.0) > 1e-12)
      throw std::invalid_argument("RelaxedControl: weights do not sum to 1");
  }
}

}  // namespace tubeflow
