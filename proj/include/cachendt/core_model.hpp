#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "cachendt/rational.hpp"

namespace cachendt {

// Static parameters of an M x K cache-aided network. Only obtainable
// through validate_config, so every instance satisfies
//   M, K, N, L > 0,  N >= K,  1/M <= mu <= 1.
class SystemConfig {
 public:
  int num_ens() const { return num_ens_; }
  int num_users() const { return num_users_; }
  int library_size() const { return library_size_; }
  const Rational& frac_cache() const { return frac_cache_; }
  std::int64_t file_bits() const { return file_bits_; }

  // Same network with a different fractional cache size (re-validated).
  SystemConfig with_frac_cache(const Rational& mu) const;

  friend SystemConfig validate_config(int num_ens, int num_users, int library_size,
                                      const Rational& frac_cache, std::int64_t file_bits);
  friend bool operator==(const SystemConfig&, const SystemConfig&) = default;

 private:
  SystemConfig() = default;

  int num_ens_ = 0;
  int num_users_ = 0;
  int library_size_ = 0;
  Rational frac_cache_;
  std::int64_t file_bits_ = 0;
};

// Throws ArgumentError for non-positive M, K, N, L or mu > 1,
// DemandError for N < K and FeasibilityError for mu < 1/M.
SystemConfig validate_config(int num_ens, int num_users, int library_size,
                             const Rational& frac_cache, std::int64_t file_bits);

// K x M real channel matrix; row k holds the coefficients from every EN to
// user k.
struct ChannelRealization {
  Eigen::MatrixXd coefficients;
  std::uint64_t seed = 0;
};

// I.i.d. standard-normal entries, deterministic in (shape, seed).
ChannelRealization sample_channel(const SystemConfig& config, std::uint64_t seed);
Eigen::MatrixXd sample_gaussian_matrix(Eigen::Index rows, Eigen::Index cols, std::uint64_t seed);

// Mixes a master seed with a stream index into an independent 64-bit seed.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index);

// Inclusive, 1-based index range [first:last].
struct IndexRange {
  Eigen::Index first;
  Eigen::Index last;
};

// Block H[rows, cols] using the 1-based inclusive convention of the
// converse notation. Throws RangeError unless 1 <= first <= last <= extent.
Eigen::MatrixXd submatrix(const Eigen::MatrixXd& h, IndexRange rows, IndexRange cols);

struct DemandVector {
  std::vector<int> demands;  // 1-based file index per user
};

// Checks length K and every entry in [1, N]; throws ArgumentError otherwise.
DemandVector make_demand(const SystemConfig& config, std::vector<int> demands);
// K distinct files (1, 2, ..., K), the request the converse argument fixes.
DemandVector worst_case_demand(const SystemConfig& config);

using BitString = std::vector<bool>;

struct FileLibrary {
  std::vector<BitString> files;  // N files, L bits each
};

FileLibrary make_library(const SystemConfig& config, std::vector<BitString> files);
// Files drawn uniformly from {0,1}^L.
FileLibrary random_library(const SystemConfig& config, std::uint64_t seed);

}  // namespace cachendt
