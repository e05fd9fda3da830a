#pragma once

#include <string>
#include <vector>

// Self-contained verification suites with pinned seeds and tolerances. Each
// returns machine-readable pass/fail lines; the CLI prints them and maps any
// failure to the verification exit code.

namespace roughfilter {

struct CheckLine {
  std::string name;
  bool pass = false;
  std::string detail;
};

// Chen relation and geometric symmetry on random canonical and midpoint
// lifts: 50 lifts (d in {1,2}, 1000 steps), 100 random triples each, defects
// below 1e-9 (1 + max|Y|^2).
std::vector<CheckLine> verify_chen(unsigned long long seed = 2024);

// Oscillating-pair suite: exact quadrature, growth exponent 1 - 1/p - eps,
// and strict ratio growth against the integral bound with the exponent
// lowered by 0.1, for p in {2.1, 2.5, 2.9}, n = 1..1024.
std::vector<CheckLine> verify_sharpness();

// Recursive-decomposition residual on a mini grid instance: sequential
// sweeps vs the joint two-substep sweep, threshold 5e-3, and at least a 2x
// drop when the grid spacing halves.
std::vector<CheckLine> verify_dpp();

// Explicit (Ito-form) vs second-order (rough-form) filter schemes on shared
// Brownian data: sup distance decreasing over dt in {4e-3, 2e-3, 1e-3} and
// below 0.02 at the finest step.
std::vector<CheckLine> verify_consistency(unsigned long long seed = 2024);

std::vector<CheckLine> verify_all(unsigned long long seed = 2024);

bool all_pass(const std::vector<CheckLine>& lines);

}  // namespace roughfilter
