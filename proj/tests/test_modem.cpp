#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <numeric>
#include <random>
#include <vector>

#include "mjn/modem.hpp"
#include "mjn/receiver_model.hpp"
#include "mjn/stats.hpp"

using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

mjn::ModemConfig config(double fsc, double fs, std::size_t cpb) {
  mjn::ModemConfig c;
  c.subcarrier_hz = fsc;
  c.sample_rate_hz = fs;
  c.cycles_per_bit = cpb;
  return c;
}

double r_squared(const std::vector<double>& x, const std::vector<double>& y) {
  const double mx = mjn::stats::mean(x);
  const double my = mjn::stats::mean(y);
  double sxy = 0.0;
  double sxx = 0.0;
  double syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  return sxy * sxy / (sxx * syy);
}

mjn::Bits random_bits(std::mt19937_64& rng, std::size_t n) {
  mjn::Bits b(n);
  for (auto& x : b) x = static_cast<std::uint8_t>(rng() & 1U);
  return b;
}

}  // namespace

TEST_CASE("quarter-rate subcarrier", "[modem][subcarrier]") {
  const auto w = mjn::subcarrier_wave(config(1.0, 4.0, 1), 8);
  CHECK(w == std::vector<std::int8_t>{1, 1, -1, -1, 1, 1, -1, -1});
  const auto shifted = mjn::subcarrier_wave(config(1.0, 4.0, 1), 4, 2);
  CHECK(shifted == std::vector<std::int8_t>{-1, -1, 1, 1});
  CHECK_THROWS_AS(mjn::subcarrier_wave(config(1.0, 4.0, 1), 0), mjn::DomainError);
}

TEST_CASE("subcarrier mean and half-period autocorrelation", "[modem][subcarrier]") {
  for (double fs : {2000.0, 20000.0, 48000.0}) {  // even periods
    const auto cfg = config(100.0, fs, 1);
    const auto period = static_cast<std::size_t>(fs / 100.0);
    const std::size_t n = 7 * period;
    const auto w = mjn::subcarrier_wave(cfg, n);
    CHECK(std::accumulate(w.begin(), w.end(), 0) == 0);
    const std::size_t lag = period / 2;
    long acc = 0;
    for (std::size_t i = 0; i < n; ++i) acc += w[i] * w[(i + lag) % n];
    CHECK(acc == -static_cast<long>(n));
  }
}

TEST_CASE("modulate a single bit", "[modem][modulate]") {
  const auto cfg = config(100.0, 2000.0, 5);
  const mjn::Bits zero = {0};
  const auto s0 = mjn::modulate(zero, cfg);
  CHECK(s0.on.size() == 100);
  CHECK(std::all_of(s0.on.begin(), s0.on.end(), [](auto v) { return v == 0; }));

  const mjn::Bits one = {1};
  const auto s1 = mjn::modulate(one, cfg);
  REQUIRE(s1.on.size() == 100);
  int rises = s1.on[0] == 1 ? 1 : 0;
  int falls = 0;
  for (std::size_t i = 1; i < s1.on.size(); ++i) {
    rises += s1.on[i - 1] == 0 && s1.on[i] == 1;
    falls += s1.on[i - 1] == 1 && s1.on[i] == 0;
  }
  CHECK(rises == 5);
  CHECK(falls == 5);
  CHECK(std::count(s1.on.begin(), s1.on.end(), 1) == 50);

  const mjn::Bits both = {1, 0};
  const auto s10 = mjn::modulate(both, cfg);
  std::vector<std::uint8_t> expect(s1.on);
  expect.insert(expect.end(), s0.on.begin(), s0.on.end());
  CHECK(s10.on == expect);

  CHECK_THROWS_AS(mjn::modulate(mjn::Bits{}, cfg), mjn::DomainError);
  CHECK_THROWS_AS(mjn::modulate(mjn::Bits{2}, cfg), mjn::DomainError);
}

TEST_CASE("config validation", "[modem]") {
  auto cfg = config(100.0, 1999.0, 5);
  CHECK_THROWS_AS(cfg.validate(), mjn::DomainError);
  cfg = config(100.0, 2000.0, 0);
  CHECK_THROWS_AS(cfg.validate(), mjn::DomainError);
  cfg = config(100.0, 2000.0, 1);
  cfg.preamble = {1, 1, 1};
  CHECK_THROWS_AS(cfg.validate(), mjn::DomainError);
  cfg = config(130.0, 20000.0, 5);
  CHECK(cfg.data_rate_bps() == 26.0);
  CHECK(config(110.0, 20000.0, 5).data_rate_bps() == 22.0);
  CHECK(config(100.0, 20000.0, 20).data_rate_bps() == 5.0);
}

TEST_CASE("non-integer samples per half-cycle", "[modem][modulate]") {
  SECTION("integer rates") {
    const auto cfg = config(30.0, 1000.0, 3);  // 16.67 samples per half-cycle
    mjn::Bits bits(40, 1);
    const auto s = mjn::modulate(bits, cfg);
    CHECK(s.on.size() == 4000);
    CHECK(mjn::bit_boundary(cfg, 1) == 100);
    // 120 whole cycles, each with ceil or floor of 16.67 ON samples.
    const auto on = std::count(s.on.begin(), s.on.end(), 1);
    CHECK(std::abs(static_cast<double>(on) - 2000.0) <= 1.0);
  }
  SECTION("non-integer rates") {
    const auto cfg = config(33.3, 1000.0, 1);
    mjn::Bits bits(333, 1);
    const auto s = mjn::modulate(bits, cfg);
    const double exact = 333.0 * 1000.0 / 33.3;
    CHECK(s.on.size() == static_cast<std::size_t>(std::ceil(exact)));
    const auto on = std::count(s.on.begin(), s.on.end(), 1);
    CHECK(std::abs(static_cast<double>(on) - 0.5 * exact) <= 2.0);
    for (std::size_t k = 1; k < 50; ++k) {
      const auto len = mjn::bit_boundary(cfg, k + 1) - mjn::bit_boundary(cfg, k);
      CHECK((len == 30 || len == 31));
    }
  }
}

TEST_CASE("render_waveform", "[modem][render]") {
  const auto cfg = config(100.0, 2000.0, 5);
  const mjn::Bits bits = {1, 0, 1, 1, 0, 0, 1};
  const auto sched = mjn::modulate(bits, cfg);

  SECTION("equal variances reproduce synthesize exactly") {
    const auto r = mjn::render_waveform(sched, 0.0274, 0.0274, 99);
    const auto s = mjn::synthesize(0.0274, sched.on.size(), 99);
    CHECK(r.real == s.real);
  }
  SECTION("deterministic per seed") {
    const auto a = mjn::render_waveform(sched, 0.07, 0.03, 5);
    const auto b = mjn::render_waveform(sched, 0.07, 0.03, 5);
    CHECK(a.real == b.real);
  }
  SECTION("segment variances") {
    mjn::Bits many(400, 1);
    const auto big = mjn::modulate(many, config(100.0, 2000.0, 5));
    const auto r = mjn::render_waveform(big, 0.0676, 0.0274, 17);
    double on_acc = 0.0;
    double off_acc = 0.0;
    std::size_t n_on = 0;
    std::size_t n_off = 0;
    for (std::size_t i = 0; i < r.size(); ++i) {
      const double p = r.real[i] * r.real[i];
      if (big.on[i]) {
        on_acc += p;
        ++n_on;
      } else {
        off_acc += p;
        ++n_off;
      }
    }
    const double diff = on_acc / static_cast<double>(n_on) - off_acc / static_cast<double>(n_off);
    const double sd = std::sqrt(2.0 * 0.0676 * 0.0676 / static_cast<double>(n_on) +
                                2.0 * 0.0274 * 0.0274 / static_cast<double>(n_off));
    CHECK(std::abs(diff - (0.0676 - 0.0274)) < 4.0 * sd);
  }
  SECTION("all-OFF schedule") {
    mjn::Bits zeros(500, 0);
    const auto r = mjn::render_waveform(mjn::modulate(zeros, cfg), 0.5, 0.0333, 3);
    CHECK_THAT(mjn::mean_square(r), WithinRel(0.0333, 4.0 * std::sqrt(2.0 / 50000.0)));
  }
  CHECK_THROWS_AS(mjn::render_waveform(sched, -1.0, 0.0, 1), mjn::DomainError);
}

TEST_CASE("demodulate zero-variance stream", "[modem][demod]") {
  auto cfg = config(100.0, 2000.0, 5);
  cfg.threshold = mjn::ThresholdPolicy::fixed(1e-9);
  mjn::SampleStream s;
  s.real.assign(1000, 0.0);
  s.sample_rate_hz = 2000.0;
  const auto r = mjn::demodulate(s, cfg);
  CHECK(r.soft_intensities.size() == 10);
  for (double x : r.soft_intensities) CHECK(x == 0.0);
  for (auto b : r.decided_bits) CHECK(b == 0);
}

TEST_CASE("demodulate errors and decisions", "[modem][demod]") {
  auto cfg = config(100.0, 2000.0, 5);
  mjn::SampleStream s;
  s.real.assign(99, 0.0);
  CHECK_THROWS_AS(mjn::demodulate(s, cfg), mjn::DomainError);
  s.real.assign(150, 0.0);
  CHECK_THROWS_AS(mjn::demodulate(s, cfg, 60), mjn::DomainError);

  cfg.power = mjn::PowerMode::magnitude_squared;
  s.real.assign(200, 0.1);
  CHECK_THROWS_AS(mjn::demodulate(s, cfg), mjn::DomainError);

  cfg = config(100.0, 2000.0, 5);
  std::mt19937_64 rng(4);
  const auto tx = mjn::frame(random_bits(rng, 13), cfg);
  const auto st = mjn::render_waveform(mjn::modulate(tx, cfg), 0.11, 0.01, 8);
  const auto r = mjn::demodulate(st, cfg);
  REQUIRE(r.soft_intensities.size() == r.decided_bits.size());
  for (std::size_t i = 0; i < r.decided_bits.size(); ++i) {
    CHECK(r.decided_bits[i] == (r.soft_intensities[i] > r.threshold_used ? 1 : 0));
  }
}

TEST_CASE("sync offset shifts the integration window", "[modem][demod]") {
  const auto cfg = config(100.0, 2000.0, 5);
  const mjn::Bits bits = {1, 0, 1, 1, 0, 0, 1, 0};
  const auto st = mjn::render_waveform(mjn::modulate(bits, cfg), 0.11, 0.01, 21);
  mjn::SampleStream padded = st;
  padded.real.insert(padded.real.begin(), 37, 0.0);
  const auto a = mjn::bit_intensities(st, cfg, 0);
  const auto b = mjn::bit_intensities(padded, cfg, 37);
  CHECK(a == b);
}

TEST_CASE("magnitude power uses both components", "[modem][demod]") {
  auto cfg = config(100.0, 2000.0, 5);
  cfg.power = mjn::PowerMode::magnitude_squared;
  mjn::SampleStream s;
  s.real.assign(100, 0.0);
  s.imag.assign(100, 0.0);
  for (std::size_t i = 0; i < 100; ++i) {
    s.real[i] = 1.0;
    s.imag[i] = 1.0;
  }
  // Balanced subcarrier over a bit: constant power integrates to zero.
  CHECK_THAT(mjn::bit_intensities(s, cfg)[0], WithinAbs(0.0, 1e-12));
  const auto w = mjn::subcarrier_wave(cfg, 100);
  for (std::size_t i = 0; i < 100; ++i) s.imag[i] = w[i] > 0 ? 1.0 : 0.0;
  CHECK_THAT(mjn::bit_intensities(s, cfg)[0], WithinAbs(50.0, 1e-12));
}

TEST_CASE("expected 1-bit intensity is N * contrast / 2", "[modem][demod][property]") {
  const auto cfg = config(100.0, 20000.0, 2);  // N = 400
  const double on = 0.0676;
  const double off = 0.0274;
  const double n = cfg.samples_per_bit();
  const mjn::Bits one = {1};
  const auto sched = mjn::modulate(one, cfg);
  std::vector<double> xs;
  for (std::uint64_t t = 0; t < 2000; ++t) {
    xs.push_back(mjn::bit_intensities(mjn::render_waveform(sched, on, off, 1000 + t), cfg)[0]);
  }
  const double sd = std::sqrt(2.0 * (n / 2.0) * (on * on + off * off));
  CHECK(std::abs(mjn::stats::mean(xs) - n * (on - off) / 2.0) < 3.0 * sd / std::sqrt(2000.0));
  CHECK_THAT(std::sqrt(mjn::stats::variance(xs)), WithinRel(sd, 0.1));
}

TEST_CASE("intensity mean grows as N and spread as sqrt(N)", "[modem][property]") {
  const double on = 0.0676;
  const double off = 0.0274;
  std::vector<double> ns;
  std::vector<double> roots;
  std::vector<double> means;
  std::vector<double> sds;
  for (std::size_t cpb : {1, 2, 4, 8, 16}) {
    const auto cfg = config(100.0, 20000.0, cpb);
    const auto sched = mjn::modulate(mjn::Bits{1}, cfg);
    std::vector<double> xs;
    for (std::uint64_t t = 0; t < 400; ++t) {
      xs.push_back(mjn::bit_intensities(mjn::render_waveform(sched, on, off, 50'000 + 1000 * cpb + t), cfg)[0]);
    }
    ns.push_back(cfg.samples_per_bit());
    roots.push_back(std::sqrt(cfg.samples_per_bit()));
    means.push_back(mjn::stats::mean(xs));
    sds.push_back(std::sqrt(mjn::stats::variance(xs)));
  }
  CHECK(r_squared(ns, means) > 0.99);
  CHECK(r_squared(roots, sds) > 0.99);
}

TEST_CASE("framing", "[modem][frame]") {
  const mjn::ModemConfig cfg;
  const mjn::Bits zeros(13, 0);
  const auto pkt = mjn::frame(zeros, cfg);
  CHECK(mjn::bits_to_string(pkt) == "11100100000000000000");
  CHECK(mjn::bits_to_hex(pkt) == "E40000");
  CHECK(mjn::deframe(pkt, cfg) == zeros);

  CHECK_THROWS_AS(mjn::frame(mjn::Bits(12, 0), cfg), mjn::DomainError);
  CHECK_THROWS_AS(mjn::deframe(mjn::Bits(19, 0), cfg), mjn::NoPacketError);

  std::mt19937_64 rng(77);
  for (int t = 0; t < 500; ++t) {
    const auto p = random_bits(rng, 13);
    CHECK(mjn::deframe(mjn::frame(p, cfg), cfg) == p);
  }
  for (std::size_t i = 0; i < 7; ++i) {
    auto bad = pkt;
    bad[i] ^= 1U;
    CHECK_THROWS_AS(mjn::deframe(bad, cfg), mjn::NoPacketError);
  }
}

TEST_CASE("bit strings and hex", "[modem]") {
  CHECK(mjn::bits_from_string("1110 010") == mjn::barker7());
  CHECK_THROWS_AS(mjn::bits_from_string("10x"), mjn::ParseError);
  CHECK(mjn::bits_to_hex(mjn::Bits{1}) == "80");
  CHECK(mjn::bits_to_hex(mjn::Bits{1, 0, 1, 0, 0, 1, 0, 1}) == "A5");
}

TEST_CASE("Barker-7 autocorrelation", "[modem][detect]") {
  const auto& b = mjn::barker7();
  REQUIRE(b.size() == 7);
  for (int lag = -6; lag <= 6; ++lag) {
    int acc = 0;
    for (int i = 0; i < 7; ++i) {
      const int j = i + lag;
      if (j < 0 || j >= 7) continue;
      acc += (b[i] ? 1 : -1) * (b[j] ? 1 : -1);
    }
    if (lag == 0) {
      CHECK(acc == 7);
    } else {
      CHECK(std::abs(acc) <= 1);
    }
  }
}

TEST_CASE("detect_packet", "[modem][detect]") {
  const mjn::ModemConfig cfg;
  auto ideal = [&](std::size_t lead) {
    std::vector<double> xs(lead, 0.0);
    const auto pkt = mjn::frame(mjn::Bits(13, 0), cfg);
    for (auto bit : pkt) xs.push_back(bit ? 10.0 : 0.0);
    xs.push_back(0.0);
    return xs;
  };
  const auto a = mjn::detect_packet(ideal(0), cfg);
  CHECK(a.offset == 0);
  CHECK_THAT(a.correlation, WithinAbs(1.0, 1e-12));
  CHECK_THAT(a.threshold, WithinAbs(5.0, 1e-12));
  CHECK(mjn::detect_packet(ideal(4), cfg).offset == 4);

  std::vector<double> flat(30, 1.0);
  CHECK_THROWS_AS(mjn::detect_packet(flat, cfg), mjn::NoPacketError);
  std::vector<double> short_seq(19, 1.0);
  CHECK_THROWS_AS(mjn::detect_packet(short_seq, cfg), mjn::DomainError);

  auto fixed = cfg;
  fixed.threshold = mjn::ThresholdPolicy::fixed(2.5);
  CHECK(mjn::detect_packet(ideal(2), fixed).threshold == 2.5);
}

TEST_CASE("loopback law", "[modem][property]") {
  const auto cfg = config(250.0, 20000.0, 5);  // 400 samples per bit
  REQUIRE(cfg.samples_per_bit() >= 200.0);
  const double off = 0.01;
  const double on = off + 10.0 * off;
  std::mt19937_64 rng(2718);
  int failures = 0;
  for (std::uint64_t t = 0; t < 1000; ++t) {
    const auto p = random_bits(rng, 13);
    const auto st = mjn::render_waveform(mjn::modulate(mjn::frame(p, cfg), cfg), on, off, 10'000 + t);
    try {
      if (mjn::deframe(mjn::demodulate(st, cfg).decided_bits, cfg) != p) ++failures;
    } catch (const mjn::NoPacketError&) {
      ++failures;
    }
  }
  CHECK(failures == 0);
}

TEST_CASE("zero-contrast law", "[modem][property]") {
  const auto cfg = config(100.0, 2000.0, 5);
  std::mt19937_64 rng(31);
  std::size_t errors = 0;
  std::size_t total = 0;
  for (std::uint64_t t = 0; t < 400; ++t) {
    const auto p = random_bits(rng, 13);
    const auto pkt = mjn::frame(p, cfg);
    const auto st = mjn::render_waveform(mjn::modulate(pkt, cfg), 0.0274, 0.0274, 500 + t);
    const auto r = mjn::demodulate(st, cfg);
    for (std::size_t i = 7; i < pkt.size(); ++i) {
      errors += r.decided_bits[i] != pkt[i];
      ++total;
    }
  }
  CHECK_THAT(static_cast<double>(errors) / static_cast<double>(total), WithinAbs(0.5, 0.02));
}
