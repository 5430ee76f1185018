#pragma once

#include <cstdint>
#include <random>

namespace stripkde {

using Engine = std::mt19937_64;

//! One step of the SplitMix64 generator; advances `state`.
inline std::uint64_t
splitmix64(std::uint64_t& state) noexcept
{
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

//! Seed for replicate `replicate` at sample size `n` under `master`.
//! Independent of evaluation order, so replicates can run in any order.
inline std::uint64_t
replicate_seed(std::uint64_t master, std::uint64_t n, std::uint64_t replicate) noexcept
{
  std::uint64_t s = master;
  std::uint64_t a = splitmix64(s);
  s = a ^ n;
  std::uint64_t b = splitmix64(s);
  s = b ^ replicate;
  return splitmix64(s);
}

//! Uniform draw on the open interval (0, 1) with 53 random bits.
inline double
uniform_open(Engine& engine) noexcept
{
  return (static_cast<double>(engine() >> 11) + 0.5) * 0x1.0p-53;
}

} // namespace stripkde
