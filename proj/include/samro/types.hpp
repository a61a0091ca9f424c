#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <random>

namespace samro {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;
using Vec2 = Eigen::Vector2d;

// Single RNG engine per deterministic unit (world, agent, collector).
// Callers own the stream; nothing in the library keeps hidden global state.
using Rng = std::mt19937_64;

inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }
inline double linear_to_db(double lin) { return 10.0 * std::log10(lin); }

}  // namespace samro
