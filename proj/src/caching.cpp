#include "cachendt/caching.hpp"

#include <algorithm>
#include <string>

#include "cachendt/errors.hpp"

namespace cachendt {
namespace {

void check_library(const FileLibrary& library, const SystemConfig& config) {
  if (static_cast<int>(library.files.size()) != config.library_size()) {
    throw ArgumentError("library size does not match the configuration");
  }
  for (const auto& f : library.files) {
    if (static_cast<std::int64_t>(f.size()) != config.file_bits()) {
      throw ArgumentError("file length does not match the configured L");
    }
  }
}

BitString slice(const BitString& bits, std::int64_t start, std::int64_t length) {
  return BitString(bits.begin() + start, bits.begin() + start + length);
}

// Splits [0, split_point) of every file into M equal slices (one per EN)
// and replicates [split_point, L) at every EN.
CacheAllocation place(const FileLibrary& library, const SystemConfig& config,
                      PlacementPolicy policy, const Rational& alpha, std::int64_t split_point) {
  const int m_count = config.num_ens();
  const std::int64_t length = config.file_bits();
  const std::int64_t piece = split_point / m_count;

  CacheAllocation alloc;
  alloc.policy = policy;
  alloc.alpha = alpha;
  alloc.split_point = split_point;
  alloc.file_bits = length;
  alloc.num_files = config.library_size();
  alloc.per_en.resize(m_count);
  for (int m = 0; m < m_count; ++m) {
    for (int n = 0; n < config.library_size(); ++n) {
      const BitString& file = library.files[n];
      if (piece > 0) {
        alloc.per_en[m].push_back({n + 1, m * piece, piece, slice(file, m * piece, piece)});
      }
      if (split_point < length) {
        alloc.per_en[m].push_back(
            {n + 1, split_point, length - split_point, slice(file, split_point, length - split_point)});
      }
    }
  }
  return alloc;
}

const Fragment* find_covering(const std::vector<Fragment>& frags, int file, std::int64_t a,
                              std::int64_t b) {
  for (const auto& f : frags) {
    if (f.file == file && f.start_bit <= a && b <= f.start_bit + f.length) return &f;
  }
  return nullptr;
}

}  // namespace

std::string_view to_string(PlacementPolicy policy) {
  switch (policy) {
    case PlacementPolicy::Split: return "split";
    case PlacementPolicy::Full: return "full";
    case PlacementPolicy::Hybrid: return "hybrid";
  }
  return "unknown";
}

std::int64_t CacheAllocation::stored_bits(int en) const {
  std::int64_t total = 0;
  for (const auto& f : per_en.at(en)) total += static_cast<std::int64_t>(f.bits.size());
  return total;
}

std::int64_t CacheAllocation::stored_bits(int en, int file) const {
  std::int64_t total = 0;
  for (const auto& f : per_en.at(en)) {
    if (f.file == file) total += static_cast<std::int64_t>(f.bits.size());
  }
  return total;
}

CacheAllocation split_placement(const FileLibrary& library, const SystemConfig& config) {
  check_library(library, config);
  if (config.frac_cache() != Rational(1, config.num_ens())) {
    throw ArgumentError("split placement needs mu = 1/M, got " + config.frac_cache().str());
  }
  if (config.file_bits() % config.num_ens() != 0) {
    throw ArgumentError("split placement needs L divisible by M");
  }
  return place(library, config, PlacementPolicy::Split, Rational(1), config.file_bits());
}

CacheAllocation full_placement(const FileLibrary& library, const SystemConfig& config) {
  check_library(library, config);
  if (config.frac_cache() != Rational(1)) {
    throw ArgumentError("full placement needs mu = 1, got " + config.frac_cache().str());
  }
  return place(library, config, PlacementPolicy::Full, Rational(0), 0);
}

CacheAllocation shared_placement(const FileLibrary& library, const SystemConfig& config,
                                 const Rational& mu) {
  check_library(library, config);
  const int m_count = config.num_ens();
  if (!(mu > Rational(1, m_count) && mu < Rational(1))) {
    throw ArgumentError("cache sharing needs 1/M < mu < 1, got " + mu.str());
  }
  const Rational alpha = (Rational(1) - mu) / (Rational(1) - Rational(1, m_count));
  const std::int64_t length = config.file_bits();
  // Round the split length up: storage per file per EN is L - s(1 - 1/M),
  // so a longer split part never exceeds the budget.
  const std::int64_t split_point = (alpha * Rational(length) / Rational(m_count)).ceil() * m_count;
  if (split_point > length) {
    throw ArgumentError("L=" + std::to_string(length) +
                        " is too short to split alpha*L bits into M equal fragments");
  }
  return place(library, config, PlacementPolicy::Hybrid, alpha, split_point);
}

bool verify_cache_budget(const CacheAllocation& allocation, const SystemConfig& config) {
  if (static_cast<int>(allocation.per_en.size()) != config.num_ens()) return false;
  const Rational mu = config.frac_cache();
  const Rational per_file = mu * Rational(config.file_bits());
  const Rational per_en = per_file * Rational(config.library_size());
  for (int m = 0; m < config.num_ens(); ++m) {
    if (Rational(allocation.stored_bits(m)) > per_en) return false;
    for (int n = 1; n <= config.library_size(); ++n) {
      if (Rational(allocation.stored_bits(m, n)) > per_file) return false;
    }
  }
  return true;
}

std::int64_t DeliveryAssignment::dedicated_bits() const {
  std::int64_t total = 0;
  for (const auto& it : items) {
    if (!it.cooperative) total += it.length;
  }
  return total;
}

std::int64_t DeliveryAssignment::cooperative_bits() const {
  std::int64_t total = 0;
  for (const auto& it : items) {
    if (it.cooperative) total += it.length;
  }
  return total;
}

DeliveryAssignment assignment_for_demand(const CacheAllocation& allocation,
                                         const DemandVector& demand) {
  const int m_count = static_cast<int>(allocation.per_en.size());
  const std::int64_t length = allocation.file_bits;
  DeliveryAssignment out;
  out.outstanding_bits.assign(demand.demands.size(), 0);

  for (std::size_t k = 0; k < demand.demands.size(); ++k) {
    const int user = static_cast<int>(k) + 1;
    const int file = demand.demands[k];
    if (file < 1 || file > allocation.num_files) {
      throw ArgumentError("demanded file " + std::to_string(file) + " not in the library");
    }

    std::vector<std::int64_t> cuts{0, length};
    for (const auto& frags : allocation.per_en) {
      for (const auto& f : frags) {
        if (f.file != file) continue;
        cuts.push_back(f.start_bit);
        cuts.push_back(f.start_bit + f.length);
      }
    }
    std::sort(cuts.begin(), cuts.end());
    cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

    for (std::size_t c = 0; c + 1 < cuts.size(); ++c) {
      const std::int64_t a = cuts[c];
      const std::int64_t b = cuts[c + 1];
      std::vector<int> holders;
      const Fragment* source = nullptr;
      for (int m = 0; m < m_count; ++m) {
        if (const Fragment* f = find_covering(allocation.per_en[m], file, a, b)) {
          holders.push_back(m + 1);
          if (source == nullptr) source = f;
        }
      }
      if (holders.empty()) {
        throw CoverageError("bits [" + std::to_string(a) + ", " + std::to_string(b) + ") of file " +
                            std::to_string(file) + " are cached nowhere");
      }
      const bool cooperative = m_count > 1 && static_cast<int>(holders.size()) == m_count;
      std::vector<int> ens = cooperative ? holders : std::vector<int>{holders.front()};
      BitString bits = slice(source->bits, a - source->start_bit, b - a);

      if (!out.items.empty()) {
        DeliveryItem& last = out.items.back();
        if (last.user == user && last.cooperative == cooperative && last.ens == ens &&
            last.start_bit + last.length == a) {
          last.length += b - a;
          last.bits.insert(last.bits.end(), bits.begin(), bits.end());
          out.outstanding_bits[k] += b - a;
          continue;
        }
      }
      out.items.push_back({user, file, a, b - a, std::move(ens), cooperative, std::move(bits)});
      out.outstanding_bits[k] += b - a;
    }
  }
  return out;
}

BitString reassemble(const DeliveryAssignment& assignment, int user) {
  BitString out;
  for (const auto& it : assignment.items) {
    if (it.user == user) out.insert(out.end(), it.bits.begin(), it.bits.end());
  }
  return out;
}

}  // namespace cachendt
