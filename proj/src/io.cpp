#include "tubeflow/io.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <stdexcept>

namespace tubeflow {

std::string format_float(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::uint64_t fnv1a(std::string_view data, std::uint64_t state) {
  for (unsigned char c : data) {
    state ^= c;
    state *= 1099511628211ULL;
  }
  return state;
}

std::string field_hash(const PolytopicField& field) {
  std::uint64_t h = fnv1a("tubeflow.field.v1");
  h = fnv1a(std::to_string(field.dimension), h);
  h = fnv1a("|", h);
  for (const VectorExpr& v : field.vertices) {
    for (const std::string& comp : v.text()) {
      h = fnv1a(comp, h);
      h = fnv1a(";", h);
    }
    h = fnv1a("|", h);
  }
  h = fnv1a(format_float(field.t_min), h);
  h = fnv1a(",", h);
  h = fnv1a(format_float(field.t_max), h);
  char buf[32];
  std::snprintf(buf, sizeof(buf), "fnv1a:%016llx", static_cast<unsigned long long>(h));
  return buf;
}

namespace {

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);  // binary: no newline translation
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  return out;
}

}  // namespace

void write_trajectory_csv(const std::filesystem::path& path, const Trajectory& traj,
                          const SwitchingSignal* u, const RelaxedControl* lam) {
  if (u && lam)
    throw std::invalid_argument("write_trajectory_csv: at most one control column");
  std::ofstream out = open_out(path);

  out << 't';
  for (int i = 1; i <= traj.dimension(); ++i) out << ",x" << i;
  if (u) out << ",u";
  if (lam)
    for (int i = 1; i <= lam->vertex_count(); ++i) out << ",lambda_" << i;
  out << '\n';

  for (std::size_t j = 0; j < traj.size(); ++j) {
    double t = traj.times()[j];
    out << format_float(t);
    const Eigen::VectorXd& x = traj.state(j);
    for (int i = 0; i < x.size(); ++i) out << ',' << format_float(x(i));
    if (u) out << ',' << u->index_at(t);
    if (lam)
      for (double w : lam->weights_at(t)) out << ',' << format_float(w);
    out << '\n';
  }
}

void write_gaps_csv(const std::filesystem::path& path, const Trajectory& reference,
                    const Trajectory& x, const Radius& r) {
  std::ofstream out = open_out(path);
  out << "t,gap,r\n";

  std::vector<double> grid;
  grid.reserve(reference.size() + x.size());
  std::merge(reference.times().begin(), reference.times().end(), x.times().begin(),
             x.times().end(), std::back_inserter(grid));
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
  double lo = std::max(reference.t_begin(), x.t_begin());
  double hi = std::min(reference.t_end(), x.t_end());

  bool first = true;
  double last = 0.0;
  for (double t : grid) {
    double tc = std::clamp(t, lo, hi);
    if (!first && tc == last) continue;
    first = false;
    last = tc;
    double gap = (reference.at(tc) - x.at(tc)).norm();
    out << format_float(tc) << ',' << format_float(gap) << ',' << format_float(r.at(tc))
        << '\n';
  }
}

void write_text_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out = open_out(path);
  out << content;
}

nlohmann::json vector_json(const Eigen::VectorXd& v) {
  nlohmann::json j = nlohmann::json::array();
  for (int i = 0; i < v.size(); ++i) j.push_back(v(i));
  return j;
}

Eigen::VectorXd vector_from_json(const nlohmann::json& j) {
  if (!j.is_array()) throw std::invalid_argument("expected a JSON array of numbers");
  Eigen::VectorXd v(j.size());
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_number()) throw std::invalid_argument("expected a JSON array of numbers");
    v(static_cast<int>(i)) = j[i].get<double>();
  }
  return v;
}

}  // namespace tubeflow
