#pragma once
#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <numbers>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

namespace lightfire
{
/// Seeded generator with distributions written out by hand so that streams are
/// identical across standard library implementations.
class Rng
{
public:
  explicit Rng(const std::uint64_t seed) : engine_(seed) { }
  /// Half-open [0, 1) with 53 bits of resolution.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  double uniform(const double lo, const double hi) { return lo + (hi - lo) * uniform(); }
  /// Uniform integer in [0, n) by rejection; n must be > 0.
  std::uint64_t index(const std::uint64_t n)
  {
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t x = engine_();
    while (x >= limit)
    {
      x = engine_();
    }
    return x % n;
  }
  bool bernoulli(const double p) { return uniform() < p; }
  double normal()
  {
    // Box-Muller, one value per call
    double u1 = uniform();
    while (u1 <= 0.0)
    {
      u1 = uniform();
    }
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }
  double normal(const double mean, const double sd) { return mean + sd * normal(); }
  double exponential(const double mean)
  {
    double u = uniform();
    while (u <= 0.0)
    {
      u = uniform();
    }
    return -mean * std::log(u);
  }
  std::uint64_t next() { return engine_(); }
  template <class T>
  void shuffle(std::vector<T>& v)
  {
    for (std::size_t i = v.size(); i > 1; --i)
    {
      std::swap(v[i - 1], v[index(i)]);
    }
  }
private:
  std::mt19937_64 engine_;
};

/// Derive an independent stream seed from a base seed and a salt (splitmix64 finalizer).
constexpr std::uint64_t derive_seed(const std::uint64_t seed, const std::uint64_t salt)
{
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (salt + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

/// Draw k distinct indices from [0, n) uniformly; returned in draw order.
std::vector<std::size_t> sample_without_replacement(std::size_t n, std::size_t k, Rng& rng);

/// Number of worker threads used by parallel loops. Never affects results.
void set_workers(int n);
int workers();

/// Run body(i) for i in [0, n) across the configured workers. Each index must write
/// only to its own output slot; callers reduce in index order afterwards.
template <class F>
void parallel_for(const std::size_t n, F&& body)
{
  const auto w = static_cast<std::size_t>(std::max(1, workers()));
  if (w <= 1 || n < 2)
  {
    for (std::size_t i = 0; i < n; ++i)
    {
      body(i);
    }
    return;
  }
  const auto chunks = std::min(w, n);
  std::vector<std::jthread> threads;
  threads.reserve(chunks);
  for (std::size_t c = 0; c < chunks; ++c)
  {
    threads.emplace_back([&body, c, chunks, n]() {
      for (std::size_t i = c; i < n; i += chunks)
      {
        body(i);
      }
    });
  }
}

/// FNV-1a 64-bit content hash.
std::uint64_t fnv1a64(std::string_view bytes);
std::uint64_t hash_file(const std::filesystem::path& path);
std::string hex64(std::uint64_t h);

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, std::string_view text);

/// Shortest round-trip decimal representation of a double.
std::string format_double(double x);

inline double sigmoid(const double z)
{
  if (z >= 0.0)
  {
    return 1.0 / (1.0 + std::exp(-z));
  }
  const double e = std::exp(z);
  return e / (1.0 + e);
}
}
