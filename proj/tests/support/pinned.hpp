#pragma once

// Regression values frozen from the first run of the seeded bootstrap on the
// sample 1..10 with seed 42 and 1000 resamples.

inline constexpr double kBootstrapTenSeed42Low = 3.6975000000000002;
inline constexpr double kBootstrapTenSeed42High = 7.4000000000000004;
