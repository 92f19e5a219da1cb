#pragma once

#include <cmath>
#include <cstdint>
#include <numeric>
#include <utility>
#include <vector>

#include "errors.hpp"

namespace lacunary {

inline bool is_prime(std::uint64_t n)
{
  if (n < 2)
    return false;
  if (n % 2 == 0)
    return n == 2;
  for (std::uint64_t d = 3; d * d <= n; d += 2)
    if (n % d == 0)
      return false;
  return true;
}

inline std::uint64_t powmod(std::uint64_t b, std::uint64_t e, std::uint64_t m)
{
  std::uint64_t r = 1 % m;
  b %= m;
  while (e) {
    if (e & 1)
      r = static_cast<std::uint64_t>(static_cast<unsigned __int128>(r) * b % m);
    b = static_cast<std::uint64_t>(static_cast<unsigned __int128>(b) * b % m);
    e >>= 1;
  }
  return r;
}

/// ℓ^e mod p for a possibly negative exponent, ℓ coprime to p (p prime).
inline std::uint32_t powmod_signed(std::uint64_t l, long long e, std::uint32_t p)
{
  long long period = p - 1;
  long long r = ((e % period) + period) % period;
  return static_cast<std::uint32_t>(powmod(l, static_cast<std::uint64_t>(r), p));
}

inline std::uint32_t inverse_mod(std::uint32_t a, std::uint32_t p)
{
  if (a % p == 0)
    throw MathError("zero has no inverse");
  return static_cast<std::uint32_t>(powmod(a, p - 2, p));
}

/// Odd primes below 256 (coefficients are stored in one byte).
inline void check_modulus(std::uint64_t p)
{
  if (p < 3 || p > 251 || !is_prime(p))
    throw InputError("p must be an odd prime below 256, got " + std::to_string(p));
}

/// Eratosthenes; primes ≤ n.
inline std::vector<std::uint32_t> primes_up_to(std::uint64_t n)
{
  std::vector<std::uint32_t> out;
  if (n < 2)
    return out;
  std::vector<bool> composite(n + 1, false);
  for (std::uint64_t i = 2; i <= n; ++i) {
    if (composite[i])
      continue;
    out.push_back(static_cast<std::uint32_t>(i));
    for (std::uint64_t j = i * i; j <= n; j += i)
      composite[j] = true;
  }
  return out;
}

/// spf[n] = smallest prime factor of n for 2 ≤ n < limit.
inline std::vector<std::uint32_t> smallest_prime_factors(std::uint64_t limit)
{
  std::vector<std::uint32_t> spf(limit, 0);
  for (std::uint64_t i = 2; i < limit; ++i) {
    if (spf[i])
      continue;
    for (std::uint64_t j = i; j < limit; j += i)
      if (!spf[j])
        spf[j] = static_cast<std::uint32_t>(i);
  }
  return spf;
}

/// mask[n] = 1 iff n is square-free, for n < limit (mask[0] = 0).
inline std::vector<std::uint8_t> squarefree_mask(std::uint64_t limit)
{
  std::vector<std::uint8_t> mask(limit, 1);
  if (limit > 0)
    mask[0] = 0;
  auto r = static_cast<std::uint64_t>(std::sqrt(static_cast<double>(limit))) + 1;
  for (auto q : primes_up_to(r)) {
    std::uint64_t sq = std::uint64_t(q) * q;
    for (std::uint64_t j = sq; j < limit; j += sq)
      mask[j] = 0;
  }
  return mask;
}

/// Prime factorization by trial division, ascending.
inline std::vector<std::pair<std::uint64_t, unsigned>> factorize(std::uint64_t n)
{
  std::vector<std::pair<std::uint64_t, unsigned>> out;
  for (std::uint64_t d = 2; d * d <= n; ++d) {
    unsigned e = 0;
    while (n % d == 0) {
      n /= d;
      ++e;
    }
    if (e)
      out.emplace_back(d, e);
  }
  if (n > 1)
    out.emplace_back(n, 1);
  return out;
}

inline std::uint64_t euler_phi(std::uint64_t n)
{
  std::uint64_t r = n;
  for (auto [q, e] : factorize(n))
    r = r / q * (q - 1);
  return r;
}

/// True iff n is a power p^j, j ≥ 0.
inline bool is_power_of(std::uint64_t n, std::uint64_t p)
{
  if (n == 0)
    return false;
  while (n % p == 0)
    n /= p;
  return n == 1;
}

inline bool is_primitive_root(std::uint64_t g, std::uint64_t p)
{
  if (g % p == 0)
    return false;
  for (auto [q, e] : factorize(p - 1))
    if (powmod(g, (p - 1) / q, p) == 1)
      return false;
  return true;
}

} // namespace lacunary
