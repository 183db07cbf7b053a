#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>
#include <string_view>

#include "otalink/campaign.hpp"

namespace otalink::campaign {

namespace {

const std::vector<std::string>& sweep_columns() {
  static const std::vector<std::string> cols{
      "sweep_value",     "repeat_index",           "subframe_index",  "order",
      "channel_power_signal", "channel_power_interference", "sinr_db", "evm_rms_pct",
      "normalized_evm_rms_pct", "mag_err_rms_pct",  "phase_err_rms_rad", "skip_reason"};
  return cols;
}

void put(std::string& line, double v) {
  char buf[32];
  if (std::isnan(v)) {
    line += "nan";
    return;
  }
  // Shortest representation that parses back to the same double.
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  line.append(buf, res.ptr);
}

void put(std::string& line, int v) {
  char buf[16];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  line.append(buf, res.ptr);
}

std::vector<std::string_view> split(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t pos = 0;
  while (true) {
    const auto comma = line.find(',', pos);
    out.push_back(line.substr(pos, comma == std::string_view::npos ? std::string_view::npos : comma - pos));
    if (comma == std::string_view::npos) break;
    pos = comma + 1;
  }
  return out;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.back() == '\r' || s.back() == ' ')) s.remove_suffix(1);
  while (!s.empty() && s.front() == ' ') s.remove_prefix(1);
  return s;
}

template <typename T>
T parse_number(std::string_view cell, std::size_t line_no, const std::string& column) {
  T v{};
  const char* first = cell.data();
  const char* last = cell.data() + cell.size();
  if (!cell.empty() && cell.front() == '+') ++first;
  const auto res = std::from_chars(first, last, v);
  if (res.ec != std::errc() || res.ptr != last)
    throw Error(Errc::format, "line " + std::to_string(line_no) + ": column '" + column + "' has non-numeric value '" +
                                  std::string(cell) + "'");
  return v;
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error(Errc::io, "cannot write " + path.string());
  return out;
}

void put_key_header(std::string& line, const std::vector<std::string>& group_by) {
  for (const auto& c : group_by) {
    line += c;
    line += ',';
  }
}

void put_key(std::string& line, const std::vector<double>& key) {
  for (double v : key) {
    put(line, v);
    line += ',';
  }
}

}  // namespace

void write_csv(const SweepTable& rows, std::ostream& out) {
  std::string line;
  line.reserve(256);
  out << kSweepTableMagic << '\n';
  const auto& cols = sweep_columns();
  for (std::size_t i = 0; i < cols.size(); ++i) out << (i ? "," : "") << cols[i];
  out << '\n';
  for (const auto& r : rows) {
    line.clear();
    put(line, r.sweep_value), line += ',';
    put(line, r.repeat_index), line += ',';
    put(line, r.subframe_index), line += ',';
    put(line, r.order), line += ',';
    put(line, r.channel_power_signal), line += ',';
    put(line, r.channel_power_interference), line += ',';
    put(line, r.sinr_db), line += ',';
    put(line, r.evm_rms_pct), line += ',';
    put(line, r.normalized_evm_rms_pct), line += ',';
    put(line, r.mag_err_rms_pct), line += ',';
    put(line, r.phase_err_rms_rad), line += ',';
    line += r.skip_reason;
    line += '\n';
    out << line;
  }
  if (!out) throw Error(Errc::io, "write failed");
}

void emit_csv(const SweepTable& rows, const std::filesystem::path& path) {
  auto out = open_out(path);
  write_csv(rows, out);
  out.close();
  if (!out) throw Error(Errc::io, "write failed for " + path.string());
}

SweepTable read_csv(std::istream& in) {
  std::string line;
  std::size_t line_no = 0;
  if (!std::getline(in, line)) throw Error(Errc::format, "empty file");
  ++line_no;
  const std::string_view magic = trim(line);
  const std::string_view prefix = "# otalink sweep-table v";
  if (magic.substr(0, prefix.size()) != prefix)
    throw Error(Errc::format, "missing sweep-table version line");
  if (magic != kSweepTableMagic)
    throw Error(Errc::format, "unsupported sweep-table version '" + std::string(magic.substr(prefix.size())) + "'");

  if (!std::getline(in, line)) throw Error(Errc::format, "missing header row");
  ++line_no;
  const auto& expected = sweep_columns();
  std::vector<std::size_t> field_of(expected.size(), std::numeric_limits<std::size_t>::max());
  const auto header = split(trim(line));
  for (std::size_t i = 0; i < header.size(); ++i) {
    const std::string name(trim(header[i]));
    const auto it = std::find(expected.begin(), expected.end(), name);
    if (it == expected.end()) throw Error(Errc::format, "unexpected column '" + name + "'");
    auto& slot = field_of[static_cast<std::size_t>(it - expected.begin())];
    if (slot != std::numeric_limits<std::size_t>::max())
      throw Error(Errc::format, "duplicate column '" + name + "'");
    slot = i;
  }
  for (std::size_t c = 0; c < expected.size(); ++c)
    if (field_of[c] == std::numeric_limits<std::size_t>::max())
      throw Error(Errc::format, "missing column '" + expected[c] + "'");

  SweepTable rows;
  while (std::getline(in, line)) {
    ++line_no;
    const auto body = trim(line);
    if (body.empty()) continue;
    const auto cells = split(body);
    if (cells.size() != header.size())
      throw Error(Errc::format, "line " + std::to_string(line_no) + ": expected " + std::to_string(header.size()) +
                                    " fields, found " + std::to_string(cells.size()));
    auto num = [&](std::size_t c) { return parse_number<double>(cells[field_of[c]], line_no, expected[c]); };
    auto integer = [&](std::size_t c) { return parse_number<int>(cells[field_of[c]], line_no, expected[c]); };
    SweepRow r;
    r.sweep_value = num(0);
    r.repeat_index = integer(1);
    r.subframe_index = integer(2);
    r.order = integer(3);
    r.channel_power_signal = num(4);
    r.channel_power_interference = num(5);
    r.sinr_db = num(6);
    r.evm_rms_pct = num(7);
    r.normalized_evm_rms_pct = num(8);
    r.mag_err_rms_pct = num(9);
    r.phase_err_rms_rad = num(10);
    r.skip_reason = std::string(cells[field_of[11]]);
    rows.push_back(std::move(r));
  }
  return rows;
}

SweepTable ingest_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::io, "cannot read " + path.string());
  return read_csv(in);
}

void write_summary_csv(const SummaryTable& table, std::ostream& out) {
  std::string line;
  put_key_header(line, table.group_by);
  line += "n";
  for (const auto& m : metric_columns()) line += "," + m + "_mean," + m + "_std," + m + "_expanded_k2";
  out << line << '\n';
  for (const auto& g : table.groups) {
    line.clear();
    put_key(line, g.key);
    put(line, static_cast<int>(g.n));
    for (const auto& s : g.stats) {
      line += ',', put(line, s.mean);
      line += ',', put(line, s.std);
      line += ',', put(line, s.expanded_k2);
    }
    out << line << '\n';
  }
}

std::size_t NumericTable::column_index(const std::string& name) const {
  const auto it = std::find(columns.begin(), columns.end(), name);
  if (it == columns.end()) throw Error(Errc::format, "missing column '" + name + "'");
  return static_cast<std::size_t>(it - columns.begin());
}

NumericTable read_numeric_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::io, "cannot read " + path.string());
  NumericTable t;
  std::string line;
  bool have_header = false;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto body = trim(line);
    if (body.empty() || body.front() == '#') continue;
    const auto cells = split(body);
    if (!have_header) {
      for (auto c : cells) t.columns.emplace_back(trim(c));
      have_header = true;
      continue;
    }
    if (cells.size() != t.columns.size())
      throw Error(Errc::format, "line " + std::to_string(line_no) + ": expected " + std::to_string(t.columns.size()) +
                                    " fields, found " + std::to_string(cells.size()));
    std::vector<double> row;
    row.reserve(cells.size());
    for (auto c : cells) {
      c = trim(c);
      double v = std::numeric_limits<double>::quiet_NaN();
      std::from_chars(c.data(), c.data() + c.size(), v);
      row.push_back(v);
    }
    t.rows.push_back(std::move(row));
  }
  if (!have_header) throw Error(Errc::format, path.string() + " has no header row");
  return t;
}

std::vector<BudgetRow> budget_table(const NumericTable& table, const std::string& power_column,
                                    const std::vector<std::string>& group_by,
                                    const uncertainty::InstrumentTerms& terms,
                                    uncertainty::Combination combination) {
  const std::size_t pc = table.column_index(power_column);
  std::vector<std::size_t> kc;
  for (const auto& g : group_by) kc.push_back(table.column_index(g));
  std::map<std::vector<double>, std::vector<double>> groups;
  for (const auto& row : table.rows) {
    if (!std::isfinite(row[pc])) continue;
    std::vector<double> key;
    for (auto c : kc) key.push_back(row[c]);
    groups[key].push_back(row[pc]);
  }
  if (groups.empty()) throw Error(Errc::insufficient_data, "no finite '" + power_column + "' values");
  std::vector<BudgetRow> out;
  for (auto& [key, values] : groups) {
    std::sort(values.begin(), values.end());
    BudgetRow b;
    b.key = key;
    b.stats = uncertainty::repeat_stats(values);
    b.budget = uncertainty::channel_power_uncertainty(b.stats, terms, combination);
    out.push_back(std::move(b));
  }
  return out;
}

void write_budget_csv(const std::vector<BudgetRow>& rows, const std::vector<std::string>& group_by,
                      std::ostream& out) {
  std::string line;
  put_key_header(line, group_by);
  line +=
      "n,mean,std,expanded_k2,repeatability_db,u_fre_resp,u_input_att,u_abs,u_rbw,u_input_mixer,total_db,combination";
  out << line << '\n';
  for (const auto& b : rows) {
    line.clear();
    put_key(line, b.key);
    put(line, static_cast<int>(b.stats.n));
    for (double v : {b.stats.mean, b.stats.std, b.stats.expanded_k2, b.budget.repeatability_db,
                     b.budget.terms.u_fre_resp, b.budget.terms.u_input_att, b.budget.terms.u_abs,
                     b.budget.terms.u_rbw, b.budget.terms.u_input_mixer, b.budget.total_db}) {
      line += ',';
      put(line, v);
    }
    line += b.budget.combination == uncertainty::Combination::linear_sum ? ",linear_sum" : ",rss";
    out << line << '\n';
  }
}

void write_plot_data(const SweepTable& rows, const SweepConfig& cfg, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error(Errc::io, "cannot create " + dir.string() + ": " + ec.message());

  // Gradient fits per order, both EVM flavours.
  struct Fits {
    metrics::GradientFit norm, unnorm;
    bool ok_norm = false, ok_unnorm = false;
  };
  std::map<int, Fits> fits;
  for (const auto* column : {"normalized_evm_rms_pct", "evm_rms_pct"}) {
    std::map<int, std::vector<metrics::GradientPoint>> pts;
    for (const auto& r : rows)
      if (r.ok()) pts[r.order].push_back({from_db(r.sinr_db), row_value(r, column)});
    for (const auto& [order, p] : pts) {
      auto& f = fits[order];
      try {
        const auto g = metrics::fit_gradient(p);
        if (std::string_view(column) == "evm_rms_pct")
          f.unnorm = g, f.ok_unnorm = true;
        else
          f.norm = g, f.ok_norm = true;
      } catch (const Error&) {
      }
    }
  }
  const double nan = std::numeric_limits<double>::quiet_NaN();

  {
    auto out = open_out(dir / "evm_vs_inv_sqrt_sinr.csv");
    out << "order,sweep_value,repeat_index,subframe_index,sinr_db,sinr_linear,inv_sqrt_sinr,evm_rms_pct,"
           "normalized_evm_rms_pct,fit_a_normalized,fit_r2_normalized,fit_a_unnormalized,fit_r2_unnormalized\n";
    std::string line;
    for (const auto& r : rows) {
      if (!r.ok()) continue;
      const auto& f = fits[r.order];
      const double lin = from_db(r.sinr_db);
      line.clear();
      put(line, r.order), line += ',';
      put(line, r.sweep_value), line += ',';
      put(line, r.repeat_index), line += ',';
      put(line, r.subframe_index), line += ',';
      put(line, r.sinr_db), line += ',';
      put(line, lin), line += ',';
      put(line, 1.0 / std::sqrt(lin)), line += ',';
      put(line, r.evm_rms_pct), line += ',';
      put(line, r.normalized_evm_rms_pct), line += ',';
      put(line, f.ok_norm ? f.norm.a : nan), line += ',';
      put(line, f.ok_norm ? f.norm.r_squared : nan), line += ',';
      put(line, f.ok_unnorm ? f.unnorm.a : nan), line += ',';
      put(line, f.ok_unnorm ? f.unnorm.r_squared : nan);
      out << line << '\n';
    }
  }
  {
    auto out = open_out(dir / "gradient_table.csv");
    out << "order,metric,a,r_squared,n_points,sinr_floor_db\n";
    std::string line;
    for (const auto& [order, f] : fits) {
      for (int k = 0; k < 2; ++k) {
        const bool ok = k == 0 ? f.ok_norm : f.ok_unnorm;
        if (!ok) continue;
        const auto& g = k == 0 ? f.norm : f.unnorm;
        line.clear();
        put(line, order);
        line += k == 0 ? ",normalized_evm_rms_pct," : ",evm_rms_pct,";
        put(line, g.a), line += ',';
        put(line, g.r_squared), line += ',';
        put(line, static_cast<int>(g.n_points)), line += ',';
        put(line, g.sinr_floor_db);
        out << line << '\n';
      }
    }
  }
  const auto summary = summarize(rows, {"sweep_value", "order"});
  {
    auto out = open_out(dir / "channel_power_vs_sweep.csv");
    write_summary_csv(summary, out);
  }
  {
    // Budget of the signal channel power at every sweep point and order.
    std::vector<BudgetRow> budget;
    std::map<std::vector<double>, std::vector<double>> groups;
    for (const auto& r : rows)
      if (r.ok()) groups[{r.sweep_value, static_cast<double>(r.order)}].push_back(r.channel_power_signal);
    for (auto& [key, values] : groups) {
      if (values.size() < 2) continue;
      std::sort(values.begin(), values.end());
      BudgetRow b;
      b.key = key;
      b.stats = uncertainty::repeat_stats(values);
      b.budget = uncertainty::channel_power_uncertainty(b.stats, cfg.instrument, cfg.combination);
      budget.push_back(std::move(b));
    }
    auto out = open_out(dir / "budget_table.csv");
    write_budget_csv(budget, {"sweep_value", "order"}, out);
  }
}

}  // namespace otalink::campaign
