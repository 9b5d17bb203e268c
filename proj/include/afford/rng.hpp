#pragma once

#include <cstdint>
#include <random>

#include "afford/math.hpp"

namespace afford {

// Uniform random unit quaternion (Shoemake's subgroup method).
inline Quat random_rotation(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  double u1 = uni(rng), u2 = uni(rng), u3 = uni(rng);
  double a = std::sqrt(1.0 - u1), b = std::sqrt(u1);
  return Quat{a * std::sin(2 * kPi * u2), a * std::cos(2 * kPi * u2),
              b * std::sin(2 * kPi * u3), b * std::cos(2 * kPi * u3)}
      .normalized();
}

// Super-Fibonacci spiral over SO(3): low-discrepancy rotation sequence.
// Index i of n; constants from the double-spiral construction.
inline Quat super_fibonacci_rotation(int i, int n) {
  constexpr double phi = 1.41421356237309504880;   // sqrt(2)
  constexpr double psi = 1.533751168755204288118041;
  double s = i + 0.5;
  double t = s / n;
  double d = 2.0 * kPi * s;
  double r = std::sqrt(t), rr = std::sqrt(1.0 - t);
  double alpha = d / phi, beta = d / psi;
  return Quat{r * std::sin(alpha), r * std::cos(alpha), rr * std::sin(beta),
              rr * std::cos(beta)}
      .normalized();
}

// Deterministic quasi-uniform orientation set, offset by a seeded rotation so
// different seeds explore different alignments.
inline std::vector<Quat> orientation_set(int n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  Quat offset = random_rotation(rng);
  std::vector<Quat> out;
  out.reserve(n);
  for (int i = 0; i < n; ++i) out.push_back((offset * super_fibonacci_rotation(i, n)).normalized());
  return out;
}

}  // namespace afford
