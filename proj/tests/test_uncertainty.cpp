#include <doctest.h>

#include <random>

#include "support.hpp"
#include "otalink/uncertainty.hpp"

using namespace otalink;
using namespace otalink::uncertainty;

namespace {

RepeatStats stats(double mean, double sd) { return {mean, sd, 10, 2.0 * sd}; }

}  // namespace

TEST_CASE("repeat stats examples") {
  const std::vector<double> fives(7, 5.0);
  const auto a = repeat_stats(fives);
  CHECK(a.mean == 5.0);
  CHECK(a.std == 0.0);
  CHECK(a.expanded_k2 == 0.0);
  CHECK(a.n == 7);

  const std::vector<double> two{1.0, 3.0};
  const auto b = repeat_stats(two);
  CHECK(b.mean == 2.0);
  CHECK(b.std == doctest::Approx(std::sqrt(2.0)).epsilon(1e-15));
  CHECK(b.expanded_k2 == doctest::Approx(2.0 * std::sqrt(2.0)).epsilon(1e-15));
}

TEST_CASE("repeat stats Monte-Carlo") {
  std::mt19937_64 rng(1);
  std::normal_distribution<double> g(10.0, 1.0);
  std::vector<double> x(100000);
  for (auto& v : x) v = g(rng);
  const auto s = repeat_stats(x);
  CHECK(s.mean == doctest::Approx(10.0).epsilon(0.01));
  CHECK(s.std == doctest::Approx(1.0).epsilon(0.01));
}

TEST_CASE("repeat stats errors") {
  const std::vector<double> one{1.0};
  CHECK(code_of([&] { repeat_stats(one); }) == Errc::insufficient_data);
  const std::vector<double> neg{1.0, -1.0};
  CHECK(code_of([&] { repeat_stats(neg); }) == Errc::validation);
}

TEST_CASE("budget with the default instrument terms") {
  const auto b = channel_power_uncertainty(stats(1.0, 0.0));
  CHECK(b.total_db == 0.92);
  CHECK(b.repeatability_db == 0.0);
  const auto c = channel_power_uncertainty(stats(2.0, 0.1));
  CHECK(std::abs(c.total_db - 1.3339) < 1e-4);
  CHECK(std::abs(c.total_db - (10.0 * std::log10(1.1) + 0.92)) < 1e-12);
  CHECK(channel_power_uncertainty(stats(3.0, 0.0), InstrumentTerms::zero()).total_db == 0.0);
}

TEST_CASE("budget total is the sum of its parts") {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(0.0, 0.5);
  for (int t = 0; t < 100; ++t) {
    const InstrumentTerms terms{u(rng), u(rng), u(rng), u(rng), u(rng)};
    const auto b = channel_power_uncertainty(stats(1.0, u(rng)), terms);
    const long double sum = static_cast<long double>(b.repeatability_db) + terms.u_fre_resp + terms.u_input_att +
                            terms.u_abs + terms.u_rbw + terms.u_input_mixer;
    CHECK(std::abs(static_cast<long double>(b.total_db) - sum) <= 1e-15L * (1.0L + sum));
    CHECK(b.repeatability_db >= 0.0);
  }
}

TEST_CASE("budget is monotone in every input") {
  const InstrumentTerms base;
  const double t0 = channel_power_uncertainty(stats(1.0, 0.05), base).total_db;
  CHECK(channel_power_uncertainty(stats(1.0, 0.06), base).total_db > t0);
  for (int k = 0; k < 5; ++k) {
    InstrumentTerms up = base;
    double* fields[] = {&up.u_fre_resp, &up.u_input_att, &up.u_abs, &up.u_rbw, &up.u_input_mixer};
    *fields[k] += 0.01;
    CHECK(channel_power_uncertainty(stats(1.0, 0.05), up).total_db > t0);
  }
}

TEST_CASE("root-sum-square combination") {
  const auto b = channel_power_uncertainty(stats(1.0, 0.0), {}, Combination::rss);
  const double expect = std::sqrt(0.38 * 0.38 + 0.2 * 0.2 + 0.24 * 0.24 + 0.03 * 0.03 + 0.07 * 0.07);
  CHECK(b.total_db == doctest::Approx(expect).epsilon(1e-14));
  CHECK(b.combination == Combination::rss);
  CHECK(b.total_db < 0.92);
}

TEST_CASE("budget errors") {
  CHECK(code_of([] { channel_power_uncertainty(stats(0.0, 0.0)); }) == Errc::validation);
  CHECK(code_of([] { channel_power_uncertainty(stats(1.0, 0.0), {-0.1, 0, 0, 0, 0}); }) == Errc::validation);
}

TEST_CASE("traceable SINR") {
  const auto sb = channel_power_uncertainty(stats(1.0, 0.0));
  const auto eq = traceable_sinr(stats(0.5, 0.0), stats(0.5, 0.0), 0.0, sb, sb);
  CHECK(eq.sinr.db == doctest::Approx(0.0));

  const auto r = traceable_sinr(stats(1.0, 0.0), stats(0.1, 0.0), 0.0, sb, sb);
  CHECK(r.sinr.db == doctest::Approx(10.0).epsilon(1e-12));
  CHECK(r.uncertainty_db == 1.84);

  const auto scaled = traceable_sinr(stats(7.0, 0.0), stats(0.7, 0.0), 0.0, sb, sb);
  CHECK(scaled.sinr.linear == doctest::Approx(r.sinr.linear).epsilon(1e-14));

  const auto rss = traceable_sinr(stats(1.0, 0.0), stats(0.1, 0.0), 0.0, sb, sb, Combination::rss);
  CHECK(rss.uncertainty_db == doctest::Approx(0.92 * std::sqrt(2.0)));

  CHECK(code_of([&] { traceable_sinr(stats(1.0, 0.0), stats(0.0, 0.0), 0.0, sb, sb); }) == Errc::undefined_sinr);
}
