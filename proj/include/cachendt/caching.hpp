#pragma once

#include <cstdint>
#include <string_view>
#include <vector>

#include "cachendt/core_model.hpp"
#include "cachendt/rational.hpp"

namespace cachendt {

enum class PlacementPolicy { Split, Full, Hybrid };

std::string_view to_string(PlacementPolicy policy);

// Contiguous slice [start_bit, start_bit + length) of one file, with its bits.
struct Fragment {
  int file = 0;  // 1-based
  std::int64_t start_bit = 0;
  std::int64_t length = 0;
  BitString bits;
};

// Uncoded, per-file cache content of every EN.
struct CacheAllocation {
  PlacementPolicy policy = PlacementPolicy::Split;
  // Fraction of each file that is split-cached (1 for split, 0 for full)
  // and the matching bit index: bits [0, split_point) are split across ENs,
  // [split_point, L) are replicated.
  Rational alpha;
  std::int64_t split_point = 0;
  std::int64_t file_bits = 0;
  int num_files = 0;
  std::vector<std::vector<Fragment>> per_en;  // per_en[m] holds EN m+1's fragments

  std::int64_t stored_bits(int en) const;                // 0-based EN index
  std::int64_t stored_bits(int en, int file) const;      // file is 1-based
};

// mu = 1/M, M | L: EN m keeps the m-th of M equal contiguous slices.
CacheAllocation split_placement(const FileLibrary& library, const SystemConfig& config);
// mu = 1: every EN keeps every file whole.
CacheAllocation full_placement(const FileLibrary& library, const SystemConfig& config);
// 1/M < mu < 1: alpha = (1-mu)/(1-1/M) of each file split, the rest replicated.
// The split length is alpha*L rounded up to a multiple of M, which keeps the
// per-EN storage within mu*L per file.
CacheAllocation shared_placement(const FileLibrary& library, const SystemConfig& config,
                                 const Rational& mu);

// True iff every EN stores <= mu*N*L bits and <= mu*L bits of every file.
bool verify_cache_budget(const CacheAllocation& allocation, const SystemConfig& config);

struct DeliveryItem {
  int user = 0;  // 1-based
  int file = 0;  // 1-based
  std::int64_t start_bit = 0;
  std::int64_t length = 0;
  // Serving EN indices (1-based). One entry for a dedicated message; every
  // EN for cooperatively transmitted (replicated) content.
  std::vector<int> ens;
  bool cooperative = false;
  BitString bits;  // taken from the serving cache, not from the library
};

struct DeliveryAssignment {
  std::vector<DeliveryItem> items;            // ordered by user, then start bit
  std::vector<std::int64_t> outstanding_bits;  // per user

  std::int64_t dedicated_bits() const;
  std::int64_t cooperative_bits() const;
};

// Maps every requested bit onto the EN(s) caching it. Throws CoverageError
// when a requested bit is cached nowhere.
DeliveryAssignment assignment_for_demand(const CacheAllocation& allocation,
                                         const DemandVector& demand);

// Concatenation of the user's delivery items in file order.
BitString reassemble(const DeliveryAssignment& assignment, int user);

}  // namespace cachendt
