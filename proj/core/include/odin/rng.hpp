#pragma once

#include <cstdint>
#include <initializer_list>

namespace odin {

namespace detail {
inline constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ull;

inline std::uint64_t splitmix_mix(std::uint64_t z)
{
  z ^= z >> 30;
  z *= 0xbf58476d1ce4e5b9ull;
  z ^= z >> 27;
  z *= 0x94d049bb133111ebull;
  z ^= z >> 31;
  return z;
}
}  // namespace detail

//! Folds identifying integers (cell coordinates, trial index, stream role)
//! into a base seed, giving every (seed, tags...) tuple its own independent
//! stream seed. Pure function of its arguments, so any parallel schedule
//! regenerates identical streams.
inline std::uint64_t derive_seed(std::uint64_t base, std::initializer_list<std::uint64_t> tags)
{
  std::uint64_t s = detail::splitmix_mix(base ^ detail::kGolden);
  for (std::uint64_t t : tags) s = detail::splitmix_mix(s ^ detail::splitmix_mix(t + detail::kGolden));
  return s;
}

//! SplitMix64 generator: tiny state, full 64-bit output, deterministic
//! across platforms. Used for all experiment sampling.
class Rng
{
public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64()
  {
    state_ += detail::kGolden;
    return detail::splitmix_mix(state_);
  }

  //! Uniform double in [0, 1) with 53 random mantissa bits.
  double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  //! Uniform double in the open interval (0, 1); never an endpoint, as
  //! inverse-CDF transforms require.
  double next_open01()
  {
    double u = next_double();
    return u > 0.0 ? u : 0x1.0p-53;
  }

private:
  std::uint64_t state_;
};

}  // namespace odin
