#ifndef OTALINK_CAMPAIGN_HPP
#define OTALINK_CAMPAIGN_HPP

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "otalink/stbc.hpp"
#include "otalink/uncertainty.hpp"

namespace otalink::campaign {

enum class SweepVariable { signal_power_dbm, target_sinr_db };
enum class InterfererPolicy { constant_total, constant_per_source };
enum class InterfererKind { none, gwn, ofdm };

struct ChannelSettings {
  enum class Kind { fixed, rayleigh } kind = Kind::fixed;
  /// h11, h12 for the fixed 2x1 channel.
  CMatrix<double> h = CMatrix<double>::Constant(1, 2, cdouble(M_SQRT1_2, 0.0));
  std::uint64_t seed = 0;
};

struct InterfererSettings {
  InterfererKind kind = InterfererKind::gwn;
  /// Total (constant_total) or per-source (constant_per_source) level.
  double power_dbm = -40.0;
  /// GWN passband; defaults to the signal's occupied band.
  std::optional<Band> band;
  /// OFDM interferer numerology; twice the default signal subcarrier
  /// spacing over the same occupied band.
  waveform::OfdmParams ofdm = default_ofdm_interferer();
  waveform::ConstellationOrder ofdm_order = waveform::ConstellationOrder::QPSK;

  static waveform::OfdmParams default_ofdm_interferer() {
    waveform::OfdmParams p;
    p.fft_size = 32;
    p.cp_len = 8;
    p.active_subcarriers = 24;
    p.symbols_per_subframe = 14;
    p.pilot_spacing = 6;
    p.pss_symbol_index = 0;
    return p;
  }
};

struct SweepConfig {
  SweepVariable sweep_variable = SweepVariable::target_sinr_db;
  double start = 30.0;
  double stop = 0.0;
  double step = -5.0;
  int repeats = 20;
  std::vector<waveform::ConstellationOrder> modulation_orders{waveform::ConstellationOrder::QPSK};
  InterfererPolicy interferer_policy = InterfererPolicy::constant_total;
  int n_interferers = 1;
  stbc::EstimationMode estimation_mode = stbc::EstimationMode::known_h;
  std::uint64_t master_seed = 1;

  // Link under test.
  int subframes = 4;
  int n_pilot_pairs = 1;
  waveform::OfdmParams ofdm{};
  ChannelSettings channel{};
  CVector<double> precoder = CVector<double>::Ones(2);
  /// Receive-plane signal level; fixed for SINR sweeps.
  double signal_power_dbm = -20.0;
  double noise_power_dbm = -110.0;
  double reference_impedance_ohm = 50.0;
  InterfererSettings interference{};
  metrics::RefMagnitude evm_reference = metrics::RefMagnitude::peak;

  uncertainty::InstrumentTerms instrument{};
  uncertainty::Combination combination = uncertainty::Combination::linear_sum;

  /// Worker threads; output does not depend on it.
  int threads = 1;

  void validate() const;
  std::vector<double> sweep_points() const;
};

struct SweepRow {
  double sweep_value = 0.0;
  int repeat_index = 0;
  int subframe_index = 0;
  int order = 4;
  double channel_power_signal = 0.0;
  double channel_power_interference = 0.0;
  double sinr_db = 0.0;
  double evm_rms_pct = 0.0;
  double normalized_evm_rms_pct = 0.0;
  double mag_err_rms_pct = 0.0;
  double phase_err_rms_rad = 0.0;
  std::string skip_reason;  // empty for evaluated rows

  bool ok() const { return skip_reason.empty(); }
  friend bool operator==(const SweepRow&, const SweepRow&) = default;
};

using SweepTable = std::vector<SweepRow>;

/// Link configuration for one (point, repeat, order) work unit.
stbc::StbcLinkConfig link_config(const SweepConfig& cfg, double sweep_value, int point_index, int repeat,
                                 waveform::ConstellationOrder order);

SweepTable run_sweep(const SweepConfig& cfg);

std::size_t count_skipped(const SweepTable& rows);

// ---------------------------------------------------------------------------
// Aggregation.

inline const std::vector<std::string>& metric_columns() {
  static const std::vector<std::string> cols{"channel_power_signal", "channel_power_interference", "sinr_db",
                                             "evm_rms_pct",          "normalized_evm_rms_pct",     "mag_err_rms_pct",
                                             "phase_err_rms_rad"};
  return cols;
}

inline const std::vector<std::string>& key_columns() {
  static const std::vector<std::string> cols{"sweep_value", "repeat_index", "subframe_index", "order"};
  return cols;
}

double row_value(const SweepRow& row, const std::string& column);

struct SummaryGroup {
  std::vector<double> key;
  Index n = 0;
  std::vector<uncertainty::RepeatStats> stats;  // parallel to metric_columns()
};

struct SummaryTable {
  std::vector<std::string> group_by;
  std::vector<SummaryGroup> groups;  // sorted by key
};

/// Per-group mean, std and k = 2 expanded half-width of every metric over
/// evaluated rows. A single-row group reports std 0.
SummaryTable summarize(const SweepTable& rows, const std::vector<std::string>& group_by);

struct GroupFit {
  std::vector<double> key;
  metrics::GradientFit fit;
};

/// Gradient fit of `evm_column` against the row SINR per group.
std::vector<GroupFit> fit_groups(const SweepTable& rows, const std::vector<std::string>& group_by,
                                 const std::string& evm_column, double sinr_floor_db);

// ---------------------------------------------------------------------------
// CSV.

inline constexpr const char* kSweepTableMagic = "# otalink sweep-table v1";

void emit_csv(const SweepTable& rows, const std::filesystem::path& path);
void write_csv(const SweepTable& rows, std::ostream& out);
SweepTable ingest_csv(const std::filesystem::path& path);
SweepTable read_csv(std::istream& in);

void write_summary_csv(const SummaryTable& table, std::ostream& out);

/// Loosely typed CSV for repeat logs: a header line and numeric cells.
struct NumericTable {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;

  std::size_t column_index(const std::string& name) const;
};

NumericTable read_numeric_csv(const std::filesystem::path& path);

/// Per-figure-class CSVs for the plotting tool.
void write_plot_data(const SweepTable& rows, const SweepConfig& cfg, const std::filesystem::path& dir);

/// Uncertainty budget rows for a power column, grouped by `group_by`.
struct BudgetRow {
  std::vector<double> key;
  uncertainty::RepeatStats stats;
  uncertainty::UncertaintyBudget budget;
};

std::vector<BudgetRow> budget_table(const NumericTable& table, const std::string& power_column,
                                    const std::vector<std::string>& group_by,
                                    const uncertainty::InstrumentTerms& terms,
                                    uncertainty::Combination combination);

void write_budget_csv(const std::vector<BudgetRow>& rows, const std::vector<std::string>& group_by,
                      std::ostream& out);

// ---------------------------------------------------------------------------
// Config file.

SweepConfig load_sweep_config(const std::filesystem::path& path);
SweepConfig parse_sweep_config(const std::string& text);

}  // namespace otalink::campaign

#endif  // OTALINK_CAMPAIGN_HPP
