// Command-line front end for sweep campaigns and post-processing.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <limits>

#include <CLI11.hpp>

#include "otalink/campaign.hpp"

namespace {

using namespace otalink;

enum Exit : int { ok = 0, other = 1, config = 2, all_skipped = 3, io = 4 };

int exit_code_for(const Error& e) {
  switch (e.code()) {
    case Errc::config:
      return Exit::config;
    case Errc::io:
    case Errc::format:
      return Exit::io;
    default:
      return Exit::other;
  }
}

/// Writes to `path`, or stdout when it is empty or "-".
template <typename Fn>
void with_output(const std::string& path, Fn&& fn) {
  if (path.empty() || path == "-") {
    fn(std::cout);
    return;
  }
  std::ofstream out(path);
  if (!out) throw Error(Errc::io, "cannot write " + path);
  fn(out);
  out.close();
  if (!out) throw Error(Errc::io, "write failed for " + path);
}

void print_key(std::ostream& os, const std::vector<double>& key) {
  for (double v : key) os << v << ',';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"otalink: OTA link-quality sweeps, EVM gradient fits and power uncertainty budgets"};
  app.require_subcommand(1);

  // sweep
  auto* sweep = app.add_subcommand("sweep", "Run a sweep campaign from a config file");
  std::string sweep_config, sweep_out, plot_dir;
  int sweep_threads = 0;
  sweep->add_option("-c,--config", sweep_config, "YAML config")->required();
  sweep->add_option("-o,--out", sweep_out, "Output CSV (stdout when omitted)");
  sweep->add_option("--plot-data", plot_dir, "Directory for per-figure plot CSVs");
  sweep->add_option("-j,--threads", sweep_threads, "Worker threads (overrides config)")->check(CLI::PositiveNumber);

  // fit
  auto* fit = app.add_subcommand("fit", "Gradient fit of EVM against 1/sqrt(SINR)");
  std::string fit_in, fit_metric = "normalized_evm_rms_pct";
  double fit_floor = -std::numeric_limits<double>::infinity();
  std::vector<std::string> fit_group{"order"};
  fit->add_option("-i,--in", fit_in, "Sweep CSV")->required();
  fit->add_option("-m,--metric", fit_metric, "EVM column")->capture_default_str();
  fit->add_option("--floor-db", fit_floor, "Only use rows with SINR above this floor");
  fit->add_option("-g,--group-by", fit_group, "Grouping columns")->capture_default_str();

  // budget
  auto* budget = app.add_subcommand("budget", "Channel-power uncertainty budget from a repeat log");
  std::string budget_in, budget_column = "channel_power_signal", budget_out;
  std::vector<std::string> budget_group;
  bool budget_rss = false;
  uncertainty::InstrumentTerms terms;
  budget->add_option("-i,--in", budget_in, "CSV with a power column")->required();
  budget->add_option("--column", budget_column, "Power column")->capture_default_str();
  budget->add_option("-g,--group-by", budget_group, "Grouping columns");
  budget->add_flag("--rss", budget_rss, "Root-sum-square instead of linear sum");
  budget->add_option("--u-fre-resp", terms.u_fre_resp)->capture_default_str();
  budget->add_option("--u-input-att", terms.u_input_att)->capture_default_str();
  budget->add_option("--u-abs", terms.u_abs)->capture_default_str();
  budget->add_option("--u-rbw", terms.u_rbw)->capture_default_str();
  budget->add_option("--u-input-mixer", terms.u_input_mixer)->capture_default_str();
  budget->add_option("-o,--out", budget_out, "Output CSV (stdout when omitted)");

  // stbc
  auto* stbc_cmd = app.add_subcommand("stbc", "Single 2x1 Alamouti link run, one line per sub-frame");
  std::string stbc_config, stbc_out;
  double stbc_value = std::numeric_limits<double>::quiet_NaN();
  int stbc_order = 4, stbc_repeat = 0;
  stbc_cmd->add_option("-c,--config", stbc_config, "YAML config (defaults when omitted)");
  stbc_cmd->add_option("--value", stbc_value, "Sweep value (first sweep point when omitted)");
  stbc_cmd->add_option("--order", stbc_order, "Modulation order")->capture_default_str();
  stbc_cmd->add_option("--repeat", stbc_repeat, "Repeat index for seeding")->capture_default_str();
  stbc_cmd->add_option("-o,--out", stbc_out, "Output CSV (stdout when omitted)");

  // summarize
  auto* summ = app.add_subcommand("summarize", "Per-group mean, std and k=2 expanded uncertainty");
  std::string summ_in, summ_out;
  std::vector<std::string> summ_group{"sweep_value", "order"};
  summ->add_option("-i,--in", summ_in, "Sweep CSV")->required();
  summ->add_option("-g,--group-by", summ_group, "Grouping columns")->capture_default_str();
  summ->add_option("-o,--out", summ_out, "Output CSV (stdout when omitted)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? Exit::ok : Exit::config;
  }

  try {
    if (*sweep) {
      auto cfg = campaign::load_sweep_config(sweep_config);
      if (sweep_threads > 0) cfg.threads = sweep_threads;
      const auto rows = campaign::run_sweep(cfg);
      with_output(sweep_out, [&](std::ostream& os) { campaign::write_csv(rows, os); });
      if (!plot_dir.empty()) campaign::write_plot_data(rows, cfg, plot_dir);
      const auto skipped = campaign::count_skipped(rows);
      std::cerr << rows.size() << " rows, " << skipped << " skipped\n";
      if (!rows.empty() && skipped == rows.size()) return Exit::all_skipped;
    } else if (*fit) {
      const auto rows = campaign::ingest_csv(fit_in);
      const auto fits = campaign::fit_groups(rows, fit_group, fit_metric, fit_floor);
      std::cout.precision(17);
      for (const auto& g : fit_group) std::cout << g << ',';
      std::cout << "a,r_squared,n_points\n";
      for (const auto& f : fits) {
        print_key(std::cout, f.key);
        std::cout << f.fit.a << ',' << f.fit.r_squared << ',' << f.fit.n_points << '\n';
      }
    } else if (*budget) {
      const auto table = campaign::read_numeric_csv(budget_in);
      terms.validate();
      const auto rows =
          campaign::budget_table(table, budget_column, budget_group, terms,
                                 budget_rss ? uncertainty::Combination::rss : uncertainty::Combination::linear_sum);
      with_output(budget_out, [&](std::ostream& os) { campaign::write_budget_csv(rows, budget_group, os); });
    } else if (*stbc_cmd) {
      const auto cfg = stbc_config.empty() ? campaign::SweepConfig{} : campaign::load_sweep_config(stbc_config);
      const double value = std::isnan(stbc_value) ? cfg.sweep_points().front() : stbc_value;
      const auto link =
          campaign::link_config(cfg, value, 0, stbc_repeat, waveform::order_from_int(stbc_order));
      const auto results = stbc::run_stbc_link(link);
      with_output(stbc_out, [&](std::ostream& os) {
        os.precision(17);
        os << "subframe_index,skip_reason,sinr_db,waveform_sinr_db,evm_rms_pct,normalized_evm_rms_pct,"
              "mag_err_rms_pct,phase_err_rms_rad,h11_re,h11_im,h12_re,h12_im\n";
        for (const auto& r : results) {
          os << r.subframe_index << ',' << r.skip_reason << ',' << r.sinr.db << ',' << r.waveform_sinr.db << ','
             << r.evm.evm_rms << ',' << r.evm.normalized_evm_rms << ',' << r.evm.mag_err_rms << ','
             << r.evm.phase_err_rms << ',' << r.estimate.h11.real() << ',' << r.estimate.h11.imag() << ','
             << r.estimate.h12.real() << ',' << r.estimate.h12.imag() << '\n';
        }
      });
    } else if (*summ) {
      const auto rows = campaign::ingest_csv(summ_in);
      const auto table = campaign::summarize(rows, summ_group);
      with_output(summ_out, [&](std::ostream& os) { campaign::write_summary_csv(table, os); });
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_code_for(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return Exit::other;
  }
  return Exit::ok;
}
