#pragma once

// Numerical tolerances shared by every module.

namespace uniord::tol {

/// Allowed deviation of sum(p) from 1 for a valid probability vector.
inline constexpr double kSumToOne = 1e-9;
/// Adjacent-entry slack used when testing unimodality.
inline constexpr double kUnimodalAdjacent = 1e-12;
/// Lower bound on the head's scale parameter.
inline constexpr double kSigmaFloor = 1e-3;
/// Below this total bin mass the head switches to a per-bin additive floor.
inline constexpr double kHeadUnderflow = 1e-300;
/// The additive floor itself.
inline constexpr double kHeadBinFloor = 1e-300;
/// Probabilities are clamped to this before taking logs in CE/KL.
inline constexpr double kLogClamp = 1e-12;
/// Masses below this are considered numerically degenerate in the sub-bin inequality check.
inline constexpr double kLemmaDegenerate = 1e-12;
/// Largest class count accepted by the exact transport oracle.
inline constexpr int kOracleMaxClasses = 16;

}  // namespace uniord::tol
