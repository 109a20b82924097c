#pragma once

// Scenario files, CSV emission and content hashes.

#include <openssl/evp.h>

#include <array>
#include <charconv>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <set>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "hcb/error.hpp"
#include "hcb/scenario.hpp"

namespace hcb::io {

using json = nlohmann::json;
namespace fs = std::filesystem;

/// Shortest round-trip is not required; 17 significant digits always are.
inline std::string format_double(double v) {
  std::array<char, 64> buf{};
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v, std::chars_format::general, 17);
  return std::string(buf.data(), res.ptr);
}

// ---------------------------------------------------------------------------
// Scenario JSON

namespace detail {

inline void reject_unknown(const json& obj, const std::set<std::string>& allowed, const std::string& where) {
  for (const auto& [key, _] : obj.items()) {
    if (!allowed.contains(key)) throw Error(ErrorCode::BadScenario, "unknown key '" + key + "' in " + where);
  }
}

template <class T>
T get_as(const json& obj, const char* key, const std::string& where) {
  try {
    return obj.at(key).get<T>();
  } catch (const json::exception& e) {
    throw Error(ErrorCode::BadScenario, std::string("bad or missing '") + key + "' in " + where + ": " + e.what());
  }
}

}  // namespace detail

inline LatticeScenario scenario_from_json(const json& j) {
  using detail::get_as;
  if (!j.is_object()) throw Error(ErrorCode::BadScenario, "scenario must be a JSON object");
  detail::reject_unknown(j, {"L", "N", "J", "bc", "potential", "normalization", "trap_renorm", "density_threshold"},
                         "scenario");
  LatticeScenario s;
  s.L = get_as<int>(j, "L", "scenario");
  s.N = get_as<int>(j, "N", "scenario");
  if (j.contains("J")) s.J = get_as<double>(j, "J", "scenario");
  if (j.contains("bc")) {
    const auto bc = get_as<std::string>(j, "bc", "scenario");
    if (bc == "periodic") s.bc = Boundary::Periodic;
    else if (bc == "open") s.bc = Boundary::Open;
    else throw Error(ErrorCode::BadScenario, "bc must be 'periodic' or 'open'");
  }
  if (j.contains("normalization")) {
    const auto n = get_as<std::string>(j, "normalization", "scenario");
    if (n == "per-site") s.normalization = Normalization::PerSite;
    else if (n == "raw") s.normalization = Normalization::Raw;
    else throw Error(ErrorCode::BadScenario, "normalization must be 'per-site' or 'raw'");
  }
  if (j.contains("trap_renorm")) s.trap_renorm = get_as<bool>(j, "trap_renorm", "scenario");
  if (j.contains("density_threshold")) s.density_threshold = get_as<double>(j, "density_threshold", "scenario");
  if (j.contains("potential")) {
    const auto& p = j.at("potential");
    if (!p.is_object()) throw Error(ErrorCode::BadScenario, "potential must be an object");
    const auto type = get_as<std::string>(p, "type", "potential");
    if (type == "flat") {
      detail::reject_unknown(p, {"type"}, "flat potential");
      s.potential = FlatPotential{};
    } else if (type == "harmonic") {
      detail::reject_unknown(p, {"type", "omega"}, "harmonic potential");
      s.potential = HarmonicPotential{get_as<double>(p, "omega", "potential")};
    } else if (type == "quasiperiodic") {
      detail::reject_unknown(p, {"type", "lambda", "gamma_num", "gamma_den", "phi"}, "quasiperiodic potential");
      QuasiperiodicPotential q;
      q.lambda = get_as<double>(p, "lambda", "potential");
      q.gamma_num = get_as<std::int64_t>(p, "gamma_num", "potential");
      q.gamma_den = get_as<std::int64_t>(p, "gamma_den", "potential");
      if (p.contains("phi")) q.phi = get_as<double>(p, "phi", "potential");
      s.potential = q;
    } else {
      throw Error(ErrorCode::BadScenario, "unknown potential type '" + type + "'");
    }
  }
  return s;
}

inline json scenario_to_json(const LatticeScenario& s) {
  json j;
  j["L"] = s.L;
  j["N"] = s.N;
  j["J"] = s.J;
  j["bc"] = s.bc == Boundary::Periodic ? "periodic" : "open";
  j["normalization"] = s.normalization == Normalization::PerSite ? "per-site" : "raw";
  j["trap_renorm"] = s.trap_renorm;
  j["density_threshold"] = s.density_threshold;
  json p;
  if (const auto* h = std::get_if<HarmonicPotential>(&s.potential)) {
    p = {{"type", "harmonic"}, {"omega", h->omega}};
  } else if (const auto* q = std::get_if<QuasiperiodicPotential>(&s.potential)) {
    p = {{"type", "quasiperiodic"},
         {"lambda", q->lambda},
         {"gamma_num", q->gamma_num},
         {"gamma_den", q->gamma_den},
         {"phi", q->phi}};
  } else {
    p = {{"type", "flat"}};
  }
  j["potential"] = p;
  return j;
}

inline LatticeScenario load_scenario(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot open scenario file " + path.string());
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::BadScenario, "malformed JSON in " + path.string() + ": " + e.what());
  }
  return scenario_from_json(j);
}

// ---------------------------------------------------------------------------
// Hashing

inline std::string sha256_hex(std::span<const unsigned char> bytes) {
  std::array<unsigned char, EVP_MAX_MD_SIZE> md{};
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), md.data(), &len, EVP_sha256(), nullptr) != 1) {
    throw Error(ErrorCode::Io, "sha256 failed");
  }
  static constexpr char hex[] = "0123456789abcdef";
  std::string out;
  out.reserve(2 * len);
  for (unsigned int i = 0; i < len; ++i) {
    out.push_back(hex[md[i] >> 4]);
    out.push_back(hex[md[i] & 0xF]);
  }
  return out;
}

inline std::string sha256_hex(const std::string& s) {
  return sha256_hex(std::span<const unsigned char>(reinterpret_cast<const unsigned char*>(s.data()), s.size()));
}

template <class T>
std::string sha256_of_values(std::span<const T> values) {
  return sha256_hex(
      std::span<const unsigned char>(reinterpret_cast<const unsigned char*>(values.data()), values.size_bytes()));
}

inline std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot read " + path.string());
  return std::string(std::istreambuf_iterator<char>(in), {});
}

inline std::string sha256_file(const fs::path& path) { return sha256_hex(read_file(path)); }

// ---------------------------------------------------------------------------
// CSV

/// Collects rows and writes them with LF endings.
class CsvWriter {
 public:
  explicit CsvWriter(std::initializer_list<std::string> header) {
    bool first = true;
    for (const auto& h : header) {
      if (!first) text_ += ',';
      text_ += h;
      first = false;
    }
    text_ += '\n';
  }

  template <class... Cells>
  void row(const Cells&... cells) {
    bool first = true;
    ((append(cells, first)), ...);
    text_ += '\n';
  }

  const std::string& text() const { return text_; }

  void save(const fs::path& path) const { write_text(path, text_); }

  static void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorCode::Io, "cannot write " + path.string());
    out << text;
    if (!out) throw Error(ErrorCode::Io, "write failed for " + path.string());
  }

 private:
  void append(double v, bool& first) {
    sep(first);
    text_ += format_double(v);
  }
  void append(int v, bool& first) {
    sep(first);
    text_ += std::to_string(v);
  }
  void append(const std::string& v, bool& first) {
    sep(first);
    text_ += v;
  }
  void sep(bool& first) {
    if (!first) text_ += ',';
    first = false;
  }

  std::string text_;
};

}  // namespace hcb::io
