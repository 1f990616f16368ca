#include "lightfire/util.h"
#include <atomic>
#include <charconv>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace lightfire
{
namespace
{
std::atomic<int> worker_count{1};
}
std::vector<std::size_t> sample_without_replacement(const std::size_t n, const std::size_t k, Rng& rng)
{
  if (k > n)
  {
    throw std::invalid_argument("cannot draw more items than available");
  }
  std::vector<std::size_t> pool(n);
  for (std::size_t i = 0; i < n; ++i)
  {
    pool[i] = i;
  }
  // partial Fisher-Yates
  for (std::size_t i = 0; i < k; ++i)
  {
    const auto j = i + static_cast<std::size_t>(rng.index(n - i));
    std::swap(pool[i], pool[j]);
  }
  pool.resize(k);
  return pool;
}
void set_workers(const int n)
{
  worker_count = std::max(1, n);
}
int workers()
{
  return worker_count;
}
std::uint64_t fnv1a64(const std::string_view bytes)
{
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const char c : bytes)
  {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return h;
}
std::uint64_t hash_file(const std::filesystem::path& path)
{
  return fnv1a64(read_text_file(path));
}
std::string hex64(const std::uint64_t h)
{
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}
std::string read_text_file(const std::filesystem::path& path)
{
  std::ifstream in(path, std::ios::binary);
  if (!in)
  {
    throw std::runtime_error("cannot open " + path.string());
  }
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}
void write_text_file(const std::filesystem::path& path, const std::string_view text)
{
  if (path.has_parent_path())
  {
    std::filesystem::create_directories(path.parent_path());
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out)
  {
    throw std::runtime_error("cannot write " + path.string());
  }
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
}
std::string format_double(const double x)
{
  if (x == 0.0)
  {
    return "0";
  }
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), x);
  return std::string(buf, res.ptr);
}
}
