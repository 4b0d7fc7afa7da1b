#ifndef WCC_COMMON_HPP
#define WCC_COMMON_HPP

#include <Eigen/Dense>

#include <cstdint>
#include <limits>
#include <random>
#include <stdexcept>
#include <string>

namespace wcc {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;
using Rng = std::mt19937_64;

inline constexpr double kInf = std::numeric_limits<double>::infinity();
inline constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Raised when an experiment configuration or a solver/problem pairing is
// invalid. Always names the offending key or precondition.
class config_error : public std::runtime_error {
 public:
  explicit config_error(const std::string& what) : std::runtime_error(what) {}
};

// Raised when an iterate turns non-finite or an iterative solve fails to
// converge; carries the iteration index at which it happened.
class numeric_error : public std::runtime_error {
 public:
  numeric_error(const std::string& what, std::int64_t iteration)
      : std::runtime_error(what + " (iteration " + std::to_string(iteration) + ")"),
        iteration(iteration) {}
  std::int64_t iteration;
};

class parse_error : public std::runtime_error {
 public:
  parse_error(const std::string& what, std::int64_t line)
      : std::runtime_error(what + " (line " + std::to_string(line) + ")"), line(line) {}
  std::int64_t line;
};

namespace detail {
// splitmix64, used only to decorrelate seeds of the named streams.
inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}
}  // namespace detail

// Independent named RNG streams derived from one user seed. Stream ids keep
// the split / algorithm / diagnostics randomness decoupled: consuming from
// one stream never shifts another.
inline Rng make_rng(std::uint64_t seed, std::uint64_t stream_id) {
  std::uint64_t s = seed ^ (0x510e527fade682d1ULL * (stream_id + 1));
  std::uint64_t a = detail::splitmix64(s);
  std::uint64_t b = detail::splitmix64(s);
  std::seed_seq seq{static_cast<std::uint32_t>(a), static_cast<std::uint32_t>(a >> 32),
                    static_cast<std::uint32_t>(b), static_cast<std::uint32_t>(b >> 32)};
  return Rng(seq);
}

inline constexpr std::uint64_t kStreamSplit = 0;
inline constexpr std::uint64_t kStreamAlgorithm = 1;
inline constexpr std::uint64_t kStreamDiagnostics = 2;

inline void require(bool cond, const std::string& what) {
  if (!cond) throw std::invalid_argument(what);
}

}  // namespace wcc

#endif  // WCC_COMMON_HPP
