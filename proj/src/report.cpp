#include "stripkde/report.hpp"

#include "stripkde/format.hpp"

#include <cmath>
#include <fstream>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace stripkde {

std::uint64_t
fnv1a64(std::string_view bytes) noexcept
{
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string
hex64(std::uint64_t v)
{
  static const char digits[] = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i, v >>= 4)
    out[static_cast<std::size_t>(i)] = digits[v & 0xf];
  return out;
}

Provenance
Provenance::of(Json config)
{
  auto hash = hex64(fnv1a64(config.dump()));
  return { std::move(config), std::move(hash) };
}

void
Table::add(std::vector<Cell> row)
{
  if (row.size() != columns.size())
    throw std::logic_error("table row width does not match its header");
  rows.push_back(std::move(row));
}

namespace {

std::string
csv_cell(const Cell& c)
{
  struct
  {
    std::string operator()(double v) const { return format_g17(v); }
    std::string operator()(std::int64_t v) const { return std::to_string(v); }
    std::string operator()(const std::string& v) const
    {
      if (v.find_first_of(",\"\n") == std::string::npos)
        return v;
      std::string q = "\"";
      for (char ch : v) {
        if (ch == '"')
          q += '"';
        q += ch;
      }
      return q + "\"";
    }
    std::string operator()(bool v) const { return v ? "true" : "false"; }
  } visit;
  return std::visit(visit, c);
}

Json
json_cell(const Cell& c)
{
  if (auto d = std::get_if<double>(&c))
    return std::isfinite(*d) ? Json(*d) : Json(nullptr);
  if (auto i = std::get_if<std::int64_t>(&c))
    return *i;
  if (auto s = std::get_if<std::string>(&c))
    return *s;
  return std::get<bool>(c);
}

} // namespace

void
write_table_csv(std::ostream& os, const Table& t, const Provenance& prov)
{
  os << "# schema=" << kSchemaVersion << " input_hash=" << prov.input_hash
     << " config=" << prov.config.dump() << '\n';
  for (std::size_t i = 0; i < t.columns.size(); ++i)
    os << (i ? "," : "") << t.columns[i];
  os << '\n';
  for (const auto& row : t.rows) {
    for (std::size_t i = 0; i < row.size(); ++i)
      os << (i ? "," : "") << csv_cell(row[i]);
    os << '\n';
  }
}

Json
table_records(const Table& t)
{
  Json arr = Json::array();
  for (const auto& row : t.rows) {
    Json rec = Json::object();
    for (std::size_t i = 0; i < row.size(); ++i)
      rec[t.columns[i]] = json_cell(row[i]);
    arr.push_back(std::move(rec));
  }
  return arr;
}

Json
result_document(const Table& t, const Provenance& prov, const Json& extra)
{
  Json doc = Json::object();
  doc["schema"] = kSchemaVersion;
  doc["input_hash"] = prov.input_hash;
  doc["config"] = prov.config;
  for (auto it = extra.begin(); it != extra.end(); ++it)
    doc[it.key()] = it.value();
  doc["rows"] = table_records(t);
  return doc;
}

Json
to_json(const GridSpec& g)
{
  return { { "half_width", g.half_width }, { "step", g.step }, { "points", g.size() } };
}

Json
to_json(const BandwidthSchedule& s)
{
  return { { "gamma", s.gamma }, { "n", s.n }, { "N", s.N }, { "theta_n", s.theta }, { "h_n", s.h } };
}

Table
risk_table(const RiskReport& r)
{
  Table t{ { "n", "N", "h_n", "psi_p", "mean_risk", "std_error", "replicates", "bias_norm_p",
             "xi_moment_p", "vicinity_max_risk", "tail_risk" },
           {} };
  for (const auto& row : r.rows)
    t.add({ row.n, row.N, row.h, row.psi, row.mean_risk, row.std_error, row.replicates,
            row.bias_norm, row.xi_moment, row.vicinity_max, row.tail_risk });
  return t;
}

Json
risk_metadata(const RiskReport& r)
{
  Json j = Json::object();
  j["density"] = r.density;
  j["vicinity"] = r.vicinity;
  j["gamma"] = r.gamma;
  j["p"] = r.p;
  j["loss"] = r.loss;
  j["grid"] = to_json(r.grid);
  j["master_seed"] = r.master_seed;
  j["evaluator"] = r.evaluator;
  j["f_norm_p_half"] = r.f_norm;
  j["beta_p"] = r.beta;
  return j;
}

void
write_file(const std::string& path, std::string_view text)
{
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os)
    throw std::runtime_error("cannot open '" + path + "' for writing");
  os.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!os)
    throw std::runtime_error("failed writing '" + path + "'");
}

} // namespace stripkde
