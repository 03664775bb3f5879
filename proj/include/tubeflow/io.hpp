#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

#include <json.hpp>

#include "tubeflow/setvalued.hpp"
#include "tubeflow/trajectory.hpp"

namespace tubeflow {

// 17 significant digits: round-trips any double exactly.
std::string format_float(double v);

std::uint64_t fnv1a(std::string_view data,
                    std::uint64_t state = 1469598103934665603ULL);

// Stable digest of the field definition (dimension, vertex expressions in
// canonical form, time domain).
std::string field_hash(const PolytopicField& field);

// Header `t,x1,...,xn[,u or lambda_1..lambda_m]`, one row per grid point.
// Pass at most one of u / lam for the trailing control column(s).
void write_trajectory_csv(const std::filesystem::path& path, const Trajectory& traj,
                          const SwitchingSignal* u = nullptr,
                          const RelaxedControl* lam = nullptr);

// Header `t,gap,r`: per union-grid point, |reference(t) - x(t)| and r(t).
void write_gaps_csv(const std::filesystem::path& path, const Trajectory& reference,
                    const Trajectory& x, const Radius& r);

void write_text_file(const std::filesystem::path& path, const std::string& content);

nlohmann::json vector_json(const Eigen::VectorXd& v);
Eigen::VectorXd vector_from_json(const nlohmann::json& j);

}  // namespace tubeflow
