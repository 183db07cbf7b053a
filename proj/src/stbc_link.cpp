#include <random>

#include "otalink/seed.hpp"
#include "otalink/stbc.hpp"

namespace otalink::stbc {

namespace {

using waveform::SymbolFrame;

struct PairPos {
  Index first_symbol;
  Index subcarrier;
};

std::vector<PairPos> pair_positions(const waveform::OfdmParams& p) {
  std::vector<PairPos> out;
  for (Index s = 0; s + 1 < p.symbols_per_subframe; s += 2)
    for (Index c = 0; c < p.active_subcarriers; ++c) out.push_back({s, c});
  return out;
}

Stacked<double> stacked_at(const CMatrix<double>& grid, const PairPos& pos) {
  return {grid(pos.first_symbol, pos.subcarrier), std::conj(grid(pos.first_symbol + 1, pos.subcarrier))};
}

CMatrix<double> channel_for(const StbcLinkConfig& cfg, int subframe) {
  if (const auto* fixed = std::get_if<channel::FixedChannel>(&cfg.channel))
    return channel::gen_channel(*fixed, 1, 2).h;
  const auto& ray = std::get<channel::RayleighIid>(cfg.channel);
  return channel::gen_channel(
             channel::RayleighIid{derive_seed(ray.seed, {stream::channel, static_cast<std::uint64_t>(subframe)})},
             1, 2)
      .h;
}

}  // namespace

Index stbc_data_pairs(const StbcLinkConfig& cfg) {
  return static_cast<Index>(pair_positions(cfg.params).size()) - cfg.n_pilot_pairs;
}

std::vector<SubframeResult> run_stbc_link(const StbcLinkConfig& cfg) {
  const auto& params = cfg.params;
  params.validate();
  if (cfg.n_subframes < 1) throw Error(Errc::validation, "need at least one sub-frame");
  if (cfg.n_pilot_pairs < 0) throw Error(Errc::validation, "negative pilot pair count");
  if (cfg.mode == EstimationMode::realtime_estimate && cfg.n_pilot_pairs < 1)
    throw Error(Errc::validation, "real-time estimation needs at least one pilot pair");
  if (!(cfg.signal_power > 0.0)) throw Error(Errc::validation, "signal power must be positive");
  if (!(cfg.noise_variance >= 0.0)) throw Error(Errc::validation, "noise variance must be non-negative");
  if (cfg.precoder.w.size() != 2) throw Error(Errc::input_shape, "precoder must have two weights");
  const auto positions = pair_positions(params);
  const Index n_pairs = static_cast<Index>(positions.size());
  const Index n_data_pairs = n_pairs - cfg.n_pilot_pairs;
  if (n_data_pairs < 1) throw Error(Errc::capacity, "no STBC pairs left for data");

  const int bps = waveform::bits_per_symbol(cfg.order);
  const Band band = waveform::occupied_band(params);
  const Index frame_len = params.frame_len();
  const double amplitude =
      std::sqrt(cfg.signal_power * params.fft_size / static_cast<double>(params.active_subcarriers));
  const metrics::EvmOptions evm_opts{cfg.evm_reference, cfg.evm_reference == metrics::RefMagnitude::peak
                                                            ? std::optional(waveform::constellation_peak(cfg.order))
                                                            : std::nullopt};

  std::vector<SubframeResult> results;
  results.reserve(static_cast<std::size_t>(cfg.n_subframes));
  for (int k = 0; k < cfg.n_subframes; ++k) {
    const int sf = cfg.first_subframe + k;
    const auto sf_key = static_cast<std::uint64_t>(sf);
    SubframeResult res;
    res.subframe_index = sf;

    // Payload and pilots.
    std::mt19937_64 rng(derive_seed(cfg.seed, {stream::payload, sf_key}));
    Bits bits(static_cast<std::size_t>(2 * n_data_pairs * bps));
    for (auto& b : bits) b = static_cast<std::uint8_t>(rng() >> 63);
    const CVector<double> data = waveform::map_symbols(bits, cfg.order);
    const CVector<double> pilots = waveform::pilot_sequence(sf, 2 * cfg.n_pilot_pairs);

    SymbolFrame tx1, tx2;
    tx1.grid = CMatrix<double>::Zero(params.symbols_per_subframe, params.active_subcarriers);
    tx2.grid = tx1.grid;
    std::vector<Stacked<double>> pair_symbols(static_cast<std::size_t>(n_pairs));
    for (Index q = 0; q < n_pairs; ++q) {
      const bool pilot = q < cfg.n_pilot_pairs;
      const Index base = pilot ? 2 * q : 2 * (q - cfg.n_pilot_pairs);
      const cdouble x1 = pilot ? pilots[base] : data[base];
      const cdouble x2 = pilot ? pilots[base + 1] : data[base + 1];
      pair_symbols[q] = {x1, x2};
      const auto code = alamouti_encode(x1, x2);
      const auto& pos = positions[q];
      tx1.grid(pos.first_symbol, pos.subcarrier) = amplitude * code.antenna1[0];
      tx1.grid(pos.first_symbol + 1, pos.subcarrier) = amplitude * code.antenna1[1];
      tx2.grid(pos.first_symbol, pos.subcarrier) = amplitude * code.antenna2[0];
      tx2.grid(pos.first_symbol + 1, pos.subcarrier) = amplitude * code.antenna2[1];
    }
    const std::vector<IqBuffer> tx{waveform::ofdm_modulate(tx1, params), waveform::ofdm_modulate(tx2, params)};

    // Receive plane components, kept apart for traceable power accounting.
    channel::ChannelMatrix h{channel_for(cfg, sf), sf};
    const IqBuffer rx_signal = channel::apply_channel(tx, h, cfg.precoder, {0.0, 0}).front();
    IqBuffer noise;
    noise.sample_rate = params.sample_rate;
    noise.samples = channel::complex_gaussian(frame_len, cfg.noise_variance,
                                              derive_seed(cfg.seed, {stream::noise, sf_key}));

    std::vector<IqBuffer> interferers;
    std::vector<double> interferer_powers;
    for (std::size_t j = 0; j < cfg.interferers.size(); ++j) {
      auto src = cfg.interferers[j];
      if (src.kind == interference::SourceKind::gwn_bandpass)
        src.seed = derive_seed(src.seed, {stream::interferer, sf_key});
      interferers.push_back(interference::render_source(src, frame_len, k * frame_len, params.sample_rate));
      interferer_powers.push_back(metrics::channel_power(interferers.back(), band));
    }

    res.channel_power_signal = metrics::channel_power(rx_signal, band);
    const double noise_in_band = cfg.noise_variance * band.fraction();
    if (cfg.target_sinr_db) {
      try {
        res.interference_scale = interference::interference_scale_for_sinr(
            res.channel_power_signal, interferer_powers, noise_in_band, *cfg.target_sinr_db);
      } catch (const Error& e) {
        if (e.code() != Errc::infeasible) throw;
        res.skip_reason = "infeasible_sinr";
        results.push_back(std::move(res));
        continue;
      }
    }
    IqBuffer interference_total;
    interference_total.sample_rate = params.sample_rate;
    interference_total.samples = CVector<double>::Zero(frame_len);
    for (auto& b : interferers) {
      b.samples *= res.interference_scale;
      interference_total.samples += b.samples;
    }
    res.channel_power_interference = metrics::channel_power(interference_total, band);
    const double wf_denominator = res.channel_power_interference + noise_in_band;
    res.waveform_sinr = wf_denominator > 0.0
                            ? metrics::SinrSample::from_linear(res.channel_power_signal / wf_denominator,
                                                               metrics::SinrPlane::waveform)
                            : metrics::SinrSample{std::numeric_limits<double>::infinity(),
                                                  std::numeric_limits<double>::infinity(),
                                                  metrics::SinrPlane::waveform};

    IqBuffer rx = rx_signal;
    rx.samples += interference_total.samples + noise.samples;

    const SymbolFrame y_total = waveform::ofdm_demodulate(rx, params);
    const SymbolFrame y_signal = waveform::ofdm_demodulate(rx_signal, params);

    // Symbol-plane SINR on the data REs.
    auto gather_data = [&](const CMatrix<double>& grid) {
      CVector<double> v(2 * n_data_pairs);
      for (Index q = cfg.n_pilot_pairs; q < n_pairs; ++q) {
        const auto& pos = positions[q];
        const Index i = 2 * (q - cfg.n_pilot_pairs);
        v[i] = grid(pos.first_symbol, pos.subcarrier);
        v[i + 1] = grid(pos.first_symbol + 1, pos.subcarrier);
      }
      return v;
    };
    std::vector<CVector<double>> interference_symbols;
    for (const auto& b : interferers) interference_symbols.push_back(gather_data(waveform::ofdm_demodulate(b, params).grid));
    try {
      res.sinr = metrics::sinr_from_symbols(gather_data(y_signal.grid), interference_symbols, cfg.noise_variance);
    } catch (const Error& e) {
      if (e.code() != Errc::undefined_sinr) throw;
      res.sinr = {std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity(),
                  metrics::SinrPlane::symbol};
    }

    // Channel knowledge.
    res.truth = {amplitude * cfg.precoder.w[0] * h.h(0, 0), amplitude * cfg.precoder.w[1] * h.h(0, 1),
                 EstimateSource::known};
    if (cfg.mode == EstimationMode::known_h) {
      res.estimate = res.truth;
    } else {
      std::vector<Stacked<double>> rx_pilots, known;
      for (Index q = 0; q < cfg.n_pilot_pairs; ++q) {
        rx_pilots.push_back(stacked_at(y_total.grid, positions[q]));
        known.push_back(pair_symbols[q]);
      }
      const bool contaminated = res.channel_power_interference > 0.0;
      res.estimate = estimate_channel_pilots<double>(
          rx_pilots, known, contaminated ? EstimateSource::pilot_contaminated : EstimateSource::pilot_clean);
    }

    // Decode data pairs.
    CVector<double> s_act(2 * n_data_pairs), s_ref(2 * n_data_pairs);
    try {
      for (Index q = cfg.n_pilot_pairs; q < n_pairs; ++q) {
        const auto combined = alamouti_combine(stacked_at(y_total.grid, positions[q]), res.estimate);
        const Index i = 2 * (q - cfg.n_pilot_pairs);
        s_act.segment<2>(i) = combined.symbols();
        s_ref.segment<2>(i) = pair_symbols[q];
      }
    } catch (const Error& e) {
      if (e.code() != Errc::degenerate_channel) throw;
      res.skip_reason = "degenerate_channel";
      results.push_back(std::move(res));
      continue;
    }
    res.evm = metrics::evm(s_act, s_ref, evm_opts);
    results.push_back(std::move(res));
  }
  return results;
}

}  // namespace otalink::stbc
