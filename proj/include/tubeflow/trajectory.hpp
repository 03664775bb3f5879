#pragma once

#include <Eigen/Dense>
#include <vector>

namespace tubeflow {

// Sampled absolutely continuous curve: states on a strictly increasing time
// grid, linearly interpolated in between.
class Trajectory {
 public:
  Trajectory() = default;
  Trajectory(std::vector<double> times, std::vector<Eigen::VectorXd> states);

  int dimension() const { return states_.empty() ? 0 : static_cast<int>(states_[0].size()); }
  std::size_t size() const { return times_.size(); }
  double t_begin() const { return times_.front(); }
  double t_end() const { return times_.back(); }

  const std::vector<double>& times() const { return times_; }
  const std::vector<Eigen::VectorXd>& states() const { return states_; }
  const Eigen::VectorXd& state(std::size_t i) const { return states_[i]; }

  // Interpolated state.  Times outside the span by more than a 1e-9
  // relative slack throw std::out_of_range; boundary noise is clamped.
  Eigen::VectorXd at(double t) const;

  double max_norm() const;

 private:
  std::vector<double> times_;
  std::vector<Eigen::VectorXd> states_;
};

// Piecewise constant vertex choice: on [breakpoints[i], breakpoints[i+1])
// the active vertex is indices[i] (1-based).  The final interval is closed.
struct SwitchingSignal {
  std::vector<double> breakpoints;
  std::vector<int> indices;

  double t_begin() const { return breakpoints.front(); }
  double t_end() const { return breakpoints.back(); }
  int intervals() const { return static_cast<int>(indices.size()); }
  int index_at(double t) const;

  // Structural checks; max_index bounds the vertex indices when positive.
  void validate(int max_index = 0) const;
};

// Piecewise constant point on the m-simplex: on [breakpoints[i],
// breakpoints[i+1]) the weight row is weights[i].
struct RelaxedControl {
  std::vector<double> breakpoints;
  std::vector<std::vector<double>> weights;

  double t_begin() const { return breakpoints.front(); }
  double t_end() const { return breakpoints.back(); }
  int intervals() const { return static_cast<int>(weights.size()); }
  int vertex_count() const { return weights.empty() ? 0 : static_cast<int>(weights[0].size()); }
  const std::vector<double>& weights_at(double t) const;

  void validate(int vertex_count = 0) const;
};

// Shared lookup: index of the interval containing t under right-open
// semantics with a closed final interval.
int interval_index(const std::vector<double>& breakpoints, double t);

}  // namespace tubeflow
