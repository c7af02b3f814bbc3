#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "cachendt/bounds.hpp"
#include "cachendt/converse_check.hpp"
#include "cachendt/phy_sim.hpp"
#include "cachendt/rational.hpp"

namespace cachendt {

inline constexpr std::string_view kTradeoffCsvHeader =
    "mu_num,mu_den,lower_num,lower_den,upper_num,upper_den,ell_star,tight";

// Rationals as integer pairs; lower/ell_star/tight are empty when the table
// has no converse (delayed or no CSI).
void write_tradeoff_csv(std::ostream& os, const TradeoffTable& table);

struct TradeoffCsvRow {
  Rational mu;
  std::optional<Rational> lower;
  Rational upper;
  std::optional<int> ell_star;
  std::optional<bool> tight;
};

// Inverse of write_tradeoff_csv; ArgumentError on a malformed header or row.
std::vector<TradeoffCsvRow> read_tradeoff_csv(std::istream& is);

nlohmann::json tradeoff_to_json(const TradeoffTable& table);

inline constexpr std::string_view kSimulationCsvHeader =
    "snr_db,trials,mean_sum_rate,mean_delivery_time,min_sum_rate,max_sum_rate,max_en_power,"
    "max_alignment_error";

// One row per SNR point, doubles printed with 17 significant digits.
void write_simulation_csv(std::ostream& os, const std::vector<SnrPoint>& points);

nlohmann::json converse_to_json(const ConverseReport& report);

// Lower-case hex SHA-256.
std::string sha256_hex(std::string_view data);
std::string sha256_file(const std::string& path);

struct OutputDigest {
  std::string path;
  std::string sha256;
};

struct RunManifest {
  std::string tool = "cachendt";
  std::string tool_version;
  std::vector<std::string> command;  // argv after the program name
  std::string subcommand;
  nlohmann::json config;
  std::optional<std::uint64_t> master_seed;
  std::string timestamp;  // UTC, ISO 8601
  std::vector<OutputDigest> outputs;
};

nlohmann::json manifest_to_json(const RunManifest& manifest);
RunManifest manifest_from_json(const nlohmann::json& j);

std::string utc_timestamp();

// Writes text with LF line endings; ArgumentError if the file cannot be opened.
void write_text_file(const std::string& path, std::string_view text);
std::string read_text_file(const std::string& path);

}  // namespace cachendt
