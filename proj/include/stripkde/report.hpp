#pragma once

#include "stripkde/kernels.hpp"
#include "stripkde/numerics.hpp"
#include "stripkde/risk.hpp"

#include <json.hpp>

#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace stripkde {

using Json = nlohmann::ordered_json;

inline constexpr int kSchemaVersion = 1;

//! 64-bit FNV-1a.
std::uint64_t fnv1a64(std::string_view bytes) noexcept;
std::string hex64(std::uint64_t v);

//! Resolved configuration echoed into every output, with its content hash.
struct Provenance
{
  Json config;
  std::string input_hash; //!< hex FNV-1a of config.dump()

  static Provenance of(Json config);
};

using Cell = std::variant<double, std::int64_t, std::string, bool>;

//! A flat result table written as CSV or as a JSON array of records.
struct Table
{
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;

  void add(std::vector<Cell> row);
};

//! "# schema=1 input_hash=... config=<json>" then header and rows; doubles
//! with 17 significant digits.
void write_table_csv(std::ostream& os, const Table& t, const Provenance& prov);
Json table_records(const Table& t);

//! {"schema": 1, "input_hash": ..., "config": ..., <extra fields>, "rows": [...]}.
Json result_document(const Table& t, const Provenance& prov, const Json& extra = Json::object());

Json to_json(const GridSpec& g);
Json to_json(const BandwidthSchedule& s);

Table risk_table(const RiskReport& r);
//! Report-level fields (density, gamma, p, loss, grid, seed, norms).
Json risk_metadata(const RiskReport& r);

//! Writes `text` to `path` (truncating); throws std::runtime_error on failure.
void write_file(const std::string& path, std::string_view text);

} // namespace stripkde
