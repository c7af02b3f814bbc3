#include "cachendt/core_model.hpp"

#include <cmath>
#include <random>
#include <string>

#include "cachendt/errors.hpp"

namespace cachendt {

SystemConfig validate_config(int num_ens, int num_users, int library_size,
                             const Rational& frac_cache, std::int64_t file_bits) {
  if (num_ens <= 0) throw ArgumentError("number of ENs must be positive");
  if (num_users <= 0) throw ArgumentError("number of users must be positive");
  if (library_size <= 0) throw ArgumentError("library size must be positive");
  if (file_bits <= 0) throw ArgumentError("file size in bits must be positive");
  if (library_size < num_users) {
    throw DemandError("library size N=" + std::to_string(library_size) +
                      " is smaller than the number of users K=" + std::to_string(num_users));
  }
  if (frac_cache > Rational(1)) {
    throw ArgumentError("fractional cache size " + frac_cache.str() + " exceeds 1");
  }
  if (frac_cache < Rational(1, num_ens)) {
    throw FeasibilityError("fractional cache size " + frac_cache.str() + " is below 1/M = 1/" +
                           std::to_string(num_ens) + "; the ENs cannot store the library");
  }
  SystemConfig config;
  config.num_ens_ = num_ens;
  config.num_users_ = num_users;
  config.library_size_ = library_size;
  config.frac_cache_ = frac_cache;
  config.file_bits_ = file_bits;
  return config;
}

SystemConfig SystemConfig::with_frac_cache(const Rational& mu) const {
  return validate_config(num_ens_, num_users_, library_size_, mu, file_bits_);
}

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) {
  std::seed_seq seq{static_cast<std::uint32_t>(master), static_cast<std::uint32_t>(master >> 32),
                    static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32)};
  std::uint32_t out[2];
  seq.generate(out, out + 2);
  return (static_cast<std::uint64_t>(out[0]) << 32) | out[1];
}

Eigen::MatrixXd sample_gaussian_matrix(Eigen::Index rows, Eigen::Index cols, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::MatrixXd m(rows, cols);
  // Column-major fill order is part of the determinism contract.
  for (Eigen::Index j = 0; j < cols; ++j) {
    for (Eigen::Index i = 0; i < rows; ++i) {
      double v = normal(rng);
      while (v == 0.0 || !std::isfinite(v)) v = normal(rng);
      m(i, j) = v;
    }
  }
  return m;
}

ChannelRealization sample_channel(const SystemConfig& config, std::uint64_t seed) {
  return {sample_gaussian_matrix(config.num_users(), config.num_ens(), seed), seed};
}

Eigen::MatrixXd submatrix(const Eigen::MatrixXd& h, IndexRange rows, IndexRange cols) {
  if (rows.first < 1 || rows.first > rows.last || rows.last > h.rows()) {
    throw RangeError("row range [" + std::to_string(rows.first) + ":" + std::to_string(rows.last) +
                     "] outside 1.." + std::to_string(h.rows()));
  }
  if (cols.first < 1 || cols.first > cols.last || cols.last > h.cols()) {
    throw RangeError("column range [" + std::to_string(cols.first) + ":" +
                     std::to_string(cols.last) + "] outside 1.." + std::to_string(h.cols()));
  }
  return h.block(rows.first - 1, cols.first - 1, rows.last - rows.first + 1,
                 cols.last - cols.first + 1);
}

DemandVector make_demand(const SystemConfig& config, std::vector<int> demands) {
  if (static_cast<int>(demands.size()) != config.num_users()) {
    throw ArgumentError("demand vector has " + std::to_string(demands.size()) +
                        " entries, expected K=" + std::to_string(config.num_users()));
  }
  for (int d : demands) {
    if (d < 1 || d > config.library_size()) {
      throw ArgumentError("requested file " + std::to_string(d) + " outside 1.." +
                          std::to_string(config.library_size()));
    }
  }
  return {std::move(demands)};
}

DemandVector worst_case_demand(const SystemConfig& config) {
  std::vector<int> d(config.num_users());
  for (int k = 0; k < config.num_users(); ++k) d[k] = k + 1;
  return {std::move(d)};
}

FileLibrary make_library(const SystemConfig& config, std::vector<BitString> files) {
  if (static_cast<int>(files.size()) != config.library_size()) {
    throw ArgumentError("library holds " + std::to_string(files.size()) + " files, expected N=" +
                        std::to_string(config.library_size()));
  }
  for (const auto& f : files) {
    if (static_cast<std::int64_t>(f.size()) != config.file_bits()) {
      throw ArgumentError("file of " + std::to_string(f.size()) + " bits, expected L=" +
                          std::to_string(config.file_bits()));
    }
  }
  return {std::move(files)};
}

FileLibrary random_library(const SystemConfig& config, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<BitString> files(config.library_size());
  for (auto& f : files) {
    f.resize(config.file_bits());
    for (std::size_t i = 0; i < f.size(); ++i) f[i] = (rng() >> 63) != 0;
  }
  return {std::move(files)};
}

}  // namespace cachendt
