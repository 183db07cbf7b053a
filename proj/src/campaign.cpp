#include "otalink/campaign.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <map>
#include <mutex>
#include <thread>

#include "otalink/seed.hpp"

namespace otalink::campaign {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

void require(bool cond, const std::string& msg) {
  if (!cond) throw Error(Errc::config, msg);
}

SweepRow make_row(double sweep_value, int repeat, int order, const stbc::SubframeResult& res) {
  SweepRow row;
  row.sweep_value = sweep_value;
  row.repeat_index = repeat;
  row.subframe_index = res.subframe_index;
  row.order = order;
  row.skip_reason = res.skip_reason;
  if (!res.ok()) {
    row.channel_power_signal = res.channel_power_signal;
    row.channel_power_interference = kNaN;
    row.sinr_db = row.evm_rms_pct = row.normalized_evm_rms_pct = kNaN;
    row.mag_err_rms_pct = row.phase_err_rms_rad = kNaN;
    return row;
  }
  row.channel_power_signal = res.channel_power_signal;
  row.channel_power_interference = res.channel_power_interference;
  row.sinr_db = res.sinr.db;
  row.evm_rms_pct = res.evm.evm_rms;
  row.normalized_evm_rms_pct = res.evm.normalized_evm_rms;
  row.mag_err_rms_pct = res.evm.mag_err_rms;
  row.phase_err_rms_rad = res.evm.phase_err_rms;
  return row;
}

uncertainty::RepeatStats stats_of(std::vector<double> values) {
  // Sorted so the result does not depend on row order.
  std::sort(values.begin(), values.end());
  if (values.size() == 1) return {values.front(), 0.0, 1, 0.0};
  const auto n = static_cast<double>(values.size());
  double mean = 0.0;
  for (double v : values) mean += v;
  mean /= n;
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  const double sd = std::sqrt(ss / (n - 1.0));
  return {mean, sd, static_cast<Index>(values.size()), 2.0 * sd};
}

std::vector<double> key_of(const SweepRow& row, const std::vector<std::string>& group_by) {
  std::vector<double> key;
  key.reserve(group_by.size());
  for (const auto& c : group_by) key.push_back(row_value(row, c));
  return key;
}

void check_group_columns(const std::vector<std::string>& group_by) {
  for (const auto& c : group_by)
    if (std::find(key_columns().begin(), key_columns().end(), c) == key_columns().end())
      throw Error(Errc::validation, "cannot group by '" + c + "'");
}

}  // namespace

void SweepConfig::validate() const {
  require(repeats >= 1, "repeats must be >= 1");
  require(!modulation_orders.empty(), "modulation_orders must not be empty");
  require(subframes >= 1, "subframes must be >= 1");
  require(n_pilot_pairs >= 0, "n_pilot_pairs must be >= 0");
  require(estimation_mode == stbc::EstimationMode::known_h || n_pilot_pairs >= 1,
          "realtime_estimate needs n_pilot_pairs >= 1");
  require(n_interferers >= 0, "n_interferers must be >= 0");
  require(interference.kind == InterfererKind::none || n_interferers >= 1,
          "an interferer kind other than none needs n_interferers >= 1");
  require(reference_impedance_ohm > 0.0, "reference_impedance_ohm must be positive");
  require(threads >= 1, "threads must be >= 1");
  require(precoder.size() == 2 && precoder.allFinite(), "precoder needs two finite weights");
  require(channel.h.rows() == 1 && channel.h.cols() == 2 && channel.h.allFinite(),
          "fixed channel needs finite h11, h12");
  require(std::isfinite(start) && std::isfinite(stop) && std::isfinite(step), "sweep bounds must be finite");
  if (step == 0.0)
    require(start == stop, "step 0 only allowed when start == stop");
  else
    require(start == stop || (stop - start) * step > 0.0, "step direction inconsistent with start/stop");
  try {
    ofdm.validate();
    interference.ofdm.validate();
    if (interference.band)
      require(interference.band->lo >= 0.0 && interference.band->lo < interference.band->hi &&
                  interference.band->hi <= 0.5,
              "interference band must satisfy 0 <= lo < hi <= 0.5");
  } catch (const Error& e) {
    if (e.code() == Errc::config) throw;
    throw Error(Errc::config, e.what());
  }
  stbc::StbcLinkConfig probe;
  probe.params = ofdm;
  probe.n_pilot_pairs = n_pilot_pairs;
  require(stbc::stbc_data_pairs(probe) >= 1, "layout leaves no STBC data pairs");
}

std::vector<double> SweepConfig::sweep_points() const {
  if (step == 0.0 || start == stop) return {start};
  const double span = (stop - start) / step;
  const auto n = static_cast<int>(std::floor(span + 1e-9)) + 1;
  std::vector<double> pts(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) pts[i] = start + i * step;
  return pts;
}

stbc::StbcLinkConfig link_config(const SweepConfig& cfg, double sweep_value, int point_index, int repeat,
                                 waveform::ConstellationOrder order) {
  const std::uint64_t unit_seed =
      derive_seed(cfg.master_seed, {static_cast<std::uint64_t>(point_index), static_cast<std::uint64_t>(repeat)});
  stbc::StbcLinkConfig link;
  link.params = cfg.ofdm;
  link.order = order;
  link.n_subframes = cfg.subframes;
  link.mode = cfg.estimation_mode;
  link.n_pilot_pairs = cfg.n_pilot_pairs;
  if (cfg.channel.kind == ChannelSettings::Kind::fixed)
    link.channel = channel::FixedChannel{cfg.channel.h};
  else
    link.channel = channel::RayleighIid{derive_seed(cfg.channel.seed, {stream::channel, unit_seed})};
  link.precoder = {cfg.precoder};
  const double signal_dbm =
      cfg.sweep_variable == SweepVariable::signal_power_dbm ? sweep_value : cfg.signal_power_dbm;
  link.signal_power = dbm_to_sample_power(signal_dbm, cfg.reference_impedance_ohm);
  link.noise_variance = dbm_to_sample_power(cfg.noise_power_dbm, cfg.reference_impedance_ohm);
  if (cfg.sweep_variable == SweepVariable::target_sinr_db) link.target_sinr_db = sweep_value;
  link.seed = unit_seed;
  link.evm_reference = cfg.evm_reference;

  const int n = cfg.interference.kind == InterfererKind::none ? 0 : cfg.n_interferers;
  const double level = dbm_to_sample_power(cfg.interference.power_dbm, cfg.reference_impedance_ohm);
  const double per_source = cfg.interferer_policy == InterfererPolicy::constant_total && n > 0 ? level / n : level;
  for (int j = 0; j < n; ++j) {
    const auto jk = static_cast<std::uint64_t>(j);
    interference::InterferenceSource src;
    src.power = per_source;
    src.seed = derive_seed(unit_seed, {stream::interferer, jk});
    if (cfg.interference.kind == InterfererKind::gwn) {
      src.kind = interference::SourceKind::gwn_bandpass;
      src.band = cfg.interference.band.value_or(waveform::occupied_band(cfg.ofdm));
    } else {
      src.kind = interference::SourceKind::ofdm_lte_like;
      src.params = cfg.interference.ofdm;
      src.order = cfg.interference.ofdm_order;
      src.frame_offset = static_cast<Index>(derive_seed(unit_seed, {stream::offset, jk}) %
                                            static_cast<std::uint64_t>(src.params.frame_len()));
    }
    link.interferers.push_back(src);
  }
  return link;
}

SweepTable run_sweep(const SweepConfig& cfg) {
  cfg.validate();
  const auto points = cfg.sweep_points();
  const auto n_orders = cfg.modulation_orders.size();
  const std::size_t n_units = points.size() * static_cast<std::size_t>(cfg.repeats) * n_orders;
  std::vector<std::vector<SweepRow>> unit_rows(n_units);

  auto run_unit = [&](std::size_t u) {
    const std::size_t oi = u % n_orders;
    const auto r = static_cast<int>((u / n_orders) % static_cast<std::size_t>(cfg.repeats));
    const auto pi = static_cast<int>(u / (n_orders * static_cast<std::size_t>(cfg.repeats)));
    const auto order = cfg.modulation_orders[oi];
    const auto link = link_config(cfg, points[pi], pi, r, order);
    auto& out = unit_rows[u];
    for (const auto& res : stbc::run_stbc_link(link))
      out.push_back(make_row(points[pi], r, static_cast<int>(order), res));
  };

  const auto n_threads = std::min<std::size_t>(static_cast<std::size_t>(cfg.threads), n_units);
  if (n_threads <= 1) {
    for (std::size_t u = 0; u < n_units; ++u) run_unit(u);
  } else {
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    std::vector<std::jthread> pool;
    for (std::size_t t = 0; t < n_threads; ++t) {
      pool.emplace_back([&] {
        for (std::size_t u = next++; u < n_units; u = next++) {
          try {
            run_unit(u);
          } catch (...) {
            std::lock_guard lock(failure_mutex);
            if (!failure) failure = std::current_exception();
            next = n_units;
          }
        }
      });
    }
    pool.clear();
    if (failure) std::rethrow_exception(failure);
  }

  SweepTable rows;
  rows.reserve(n_units * static_cast<std::size_t>(cfg.subframes));
  for (auto& unit : unit_rows)
    for (auto& row : unit) rows.push_back(std::move(row));
  return rows;
}

std::size_t count_skipped(const SweepTable& rows) {
  return static_cast<std::size_t>(std::count_if(rows.begin(), rows.end(), [](const auto& r) { return !r.ok(); }));
}

double row_value(const SweepRow& row, const std::string& column) {
  if (column == "sweep_value") return row.sweep_value;
  if (column == "repeat_index") return row.repeat_index;
  if (column == "subframe_index") return row.subframe_index;
  if (column == "order") return row.order;
  if (column == "channel_power_signal") return row.channel_power_signal;
  if (column == "channel_power_interference") return row.channel_power_interference;
  if (column == "sinr_db") return row.sinr_db;
  if (column == "evm_rms_pct") return row.evm_rms_pct;
  if (column == "normalized_evm_rms_pct") return row.normalized_evm_rms_pct;
  if (column == "mag_err_rms_pct") return row.mag_err_rms_pct;
  if (column == "phase_err_rms_rad") return row.phase_err_rms_rad;
  throw Error(Errc::validation, "unknown column '" + column + "'");
}

SummaryTable summarize(const SweepTable& rows, const std::vector<std::string>& group_by) {
  check_group_columns(group_by);
  const auto& metrics = metric_columns();
  std::map<std::vector<double>, std::vector<std::vector<double>>> groups;
  for (const auto& row : rows) {
    if (!row.ok()) continue;
    auto& cols = groups[key_of(row, group_by)];
    cols.resize(metrics.size());
    for (std::size_t m = 0; m < metrics.size(); ++m) cols[m].push_back(row_value(row, metrics[m]));
  }
  if (groups.empty()) throw Error(Errc::insufficient_data, "no evaluated rows to summarize");
  SummaryTable out;
  out.group_by = group_by;
  for (auto& [key, cols] : groups) {
    SummaryGroup g;
    g.key = key;
    g.n = static_cast<Index>(cols.front().size());
    for (auto& values : cols) g.stats.push_back(stats_of(std::move(values)));
    out.groups.push_back(std::move(g));
  }
  return out;
}

std::vector<GroupFit> fit_groups(const SweepTable& rows, const std::vector<std::string>& group_by,
                                 const std::string& evm_column, double sinr_floor_db) {
  check_group_columns(group_by);
  row_value(SweepRow{}, evm_column);
  std::map<std::vector<double>, std::vector<metrics::GradientPoint>> groups;
  for (const auto& row : rows) {
    if (!row.ok()) continue;
    groups[key_of(row, group_by)].push_back({from_db(row.sinr_db), row_value(row, evm_column)});
  }
  if (groups.empty()) throw Error(Errc::insufficient_data, "no evaluated rows to fit");
  std::vector<GroupFit> out;
  for (const auto& [key, pts] : groups) out.push_back({key, metrics::fit_gradient(pts, sinr_floor_db)});
  return out;
}

}  // namespace otalink::campaign
