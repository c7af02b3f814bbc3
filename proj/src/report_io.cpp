#include "cachendt/report_io.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <charconv>
#include <chrono>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>

#include "cachendt/errors.hpp"

namespace cachendt {
namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream is(line);
  while (std::getline(is, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

std::int64_t to_int(const std::string& cell, std::size_t line_no) {
  std::int64_t v = 0;
  const auto* end = cell.data() + cell.size();
  const auto [ptr, ec] = std::from_chars(cell.data(), end, v);
  if (ec != std::errc() || ptr != end || cell.empty()) {
    throw ArgumentError("line " + std::to_string(line_no) + ": '" + cell + "' is not an integer");
  }
  return v;
}

std::string fmt_double(double v) {
  std::ostringstream os;
  os << std::setprecision(std::numeric_limits<double>::max_digits10) << v;
  return os.str();
}

nlohmann::json rational_json(const Rational& r) { return r.str(); }

}  // namespace

void write_tradeoff_csv(std::ostream& os, const TradeoffTable& table) {
  os << kTradeoffCsvHeader << '\n';
  for (const auto& row : table.rows) {
    os << row.mu.num() << ',' << row.mu.den() << ',';
    if (row.lower) {
      os << row.lower->value.num() << ',' << row.lower->value.den() << ',';
    } else {
      os << ",,";
    }
    os << row.upper.num() << ',' << row.upper.den() << ',';
    if (row.lower) {
      os << row.lower->ell_star << ',' << (row.tight ? 1 : 0);
    } else {
      os << ',';
    }
    os << '\n';
  }
}

std::vector<TradeoffCsvRow> read_tradeoff_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line) || line != kTradeoffCsvHeader) {
    throw ArgumentError("tradeoff CSV header mismatch");
  }
  std::vector<TradeoffCsvRow> rows;
  std::size_t line_no = 1;
  while (std::getline(is, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto cells = split_csv_line(line);
    if (cells.size() != 8) {
      throw ArgumentError("line " + std::to_string(line_no) + ": expected 8 fields");
    }
    TradeoffCsvRow row;
    row.mu = Rational(to_int(cells[0], line_no), to_int(cells[1], line_no));
    if (!cells[2].empty() || !cells[3].empty()) {
      row.lower = Rational(to_int(cells[2], line_no), to_int(cells[3], line_no));
    }
    row.upper = Rational(to_int(cells[4], line_no), to_int(cells[5], line_no));
    if (!cells[6].empty()) row.ell_star = static_cast<int>(to_int(cells[6], line_no));
    if (!cells[7].empty()) {
      const auto t = to_int(cells[7], line_no);
      if (t != 0 && t != 1) throw ArgumentError("line " + std::to_string(line_no) + ": bad tight flag");
      row.tight = t == 1;
    }
    rows.push_back(row);
  }
  return rows;
}

nlohmann::json tradeoff_to_json(const TradeoffTable& table) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& row : table.rows) {
    nlohmann::json r;
    r["mu"] = rational_json(row.mu);
    r["upper"] = rational_json(row.upper);
    if (row.lower) {
      r["lower"] = rational_json(row.lower->value);
      r["ell_star"] = row.lower->ell_star;
      r["tight"] = row.tight;
    } else {
      r["lower"] = nullptr;
      r["ell_star"] = nullptr;
      r["tight"] = nullptr;
    }
    rows.push_back(r);
  }
  return {{"csi", std::string(to_string(table.mode))}, {"rows", rows}};
}

void write_simulation_csv(std::ostream& os, const std::vector<SnrPoint>& points) {
  os << kSimulationCsvHeader << '\n';
  for (const auto& p : points) {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    double power = 0.0;
    double align = 0.0;
    for (const auto& t : p.trials) {
      lo = std::min(lo, t.achieved_sum_rate);
      hi = std::max(hi, t.achieved_sum_rate);
      power = std::max(power, t.max_en_power);
      align = std::max(align, t.max_alignment_error);
    }
    os << fmt_double(p.snr_db) << ',' << p.trials.size() << ',' << fmt_double(p.mean_sum_rate())
       << ',' << fmt_double(p.mean_delivery_time()) << ',' << fmt_double(lo) << ','
       << fmt_double(hi) << ',' << fmt_double(power) << ',' << fmt_double(align) << '\n';
  }
}

nlohmann::json converse_to_json(const ConverseReport& report) {
  nlohmann::json levels = nlohmann::json::array();
  for (const auto& l : report.levels) {
    levels.push_back({
        {"ell", l.ell},
        {"lambda_max", l.lambda_max},
        {"max_reconstruction_residual", l.max_reconstruction_residual},
        {"max_noiseless_residual", l.max_noiseless_residual},
        {"max_logdet", l.max_logdet},
        {"max_logdet_oracle_error", l.max_logdet_oracle_error},
        {"noise_cov_max_abs_error", l.noise_cov_max_abs_error},
        {"noise_cov_max_normalized_error", l.noise_cov_max_normalized_error},
        {"singular_resamples", l.singular_resamples},
        {"lambda_literal_violations", l.lambda_literal_violations},
        {"pass", l.pass},
    });
  }
  return {
      {"m", report.num_ens},
      {"k", report.num_users},
      {"trials", report.trials},
      {"noise_samples", report.noise_samples},
      {"noise_channels", report.noise_channels},
      {"seed", report.seed},
      {"tolerances",
       {{"reconstruction", kReconstructionTolerance},
        {"noiseless", kNoiselessTolerance},
        {"logdet", kLogdetTolerance},
        {"noise_cov", kNoiseCovTolerance}}},
      {"levels", levels},
      {"pass", report.pass},
  };
}

std::string sha256_hex(std::string_view data) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
    throw Error("SHA-256 computation failed");
  }
  std::ostringstream os;
  for (unsigned int i = 0; i < len; ++i) {
    os << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(digest[i]);
  }
  return os.str();
}

std::string sha256_file(const std::string& path) { return sha256_hex(read_text_file(path)); }

nlohmann::json manifest_to_json(const RunManifest& m) {
  nlohmann::json outputs = nlohmann::json::array();
  for (const auto& o : m.outputs) outputs.push_back({{"path", o.path}, {"sha256", o.sha256}});
  nlohmann::json j = {
      {"tool", m.tool},
      {"tool_version", m.tool_version},
      {"command", m.command},
      {"subcommand", m.subcommand},
      {"config", m.config},
      {"timestamp", m.timestamp},
      {"outputs", outputs},
  };
  j["master_seed"] = m.master_seed ? nlohmann::json(*m.master_seed) : nlohmann::json(nullptr);
  return j;
}

RunManifest manifest_from_json(const nlohmann::json& j) {
  try {
    RunManifest m;
    m.tool = j.at("tool").get<std::string>();
    m.tool_version = j.at("tool_version").get<std::string>();
    m.command = j.at("command").get<std::vector<std::string>>();
    m.subcommand = j.at("subcommand").get<std::string>();
    m.config = j.at("config");
    if (!j.at("master_seed").is_null()) m.master_seed = j.at("master_seed").get<std::uint64_t>();
    m.timestamp = j.at("timestamp").get<std::string>();
    for (const auto& o : j.at("outputs")) {
      m.outputs.push_back({o.at("path").get<std::string>(), o.at("sha256").get<std::string>()});
    }
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw ArgumentError(std::string("malformed manifest: ") + e.what());
  }
}

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  std::ostringstream os;
  os << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return os.str();
}

void write_text_file(const std::string& path, std::string_view text) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw ArgumentError("cannot open '" + path + "' for writing");
  f.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!f) throw Error("failed writing '" + path + "'");
}

std::string read_text_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw ArgumentError("cannot open '" + path + "'");
  std::ostringstream os;
  os << f.rdbuf();
  return os.str();
}

}  // namespace cachendt
