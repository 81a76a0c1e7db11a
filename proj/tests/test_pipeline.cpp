#include <cmath>
#include <random>

#include "doctest.h"
#include "support.hpp"
#include "themis/error.hpp"
#include "themis/pipeline.hpp"
#include "themis/report_io.hpp"
#include "themis/synthetic.hpp"

using namespace themis;
namespace tp = themis::pipeline;

namespace {

struct Fixture {
  support::TempDir dir;
  synth::LabeledSeries data;
  tp::RunConfig config;

  explicit Fixture(std::size_t length = 2048) {
    synth::LevelShiftSpec spec;
    spec.length = length;
    spec.segments = 3;
    spec.seed = 7;
    data = synth::level_shift_series(spec);
    io::write_series_csv(data.series, dir / "series.csv");
    io::write_labels_csv(data.labels, dir / "labels.csv");
    config.series = dir / "series.csv";
    config.labels = dir / "labels.csv";
    config.reference_embedder = true;
    config.window = 128;
    config.batch_windows = 4;
    config.adapter.spectral.k = 3;
  }
};

}  // namespace

TEST_SUITE("pipeline") {
  TEST_CASE("synthetic generator places disjoint labelled segments") {
    synth::LevelShiftSpec spec;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
      spec.seed = seed;
      const auto d = synth::level_shift_series(spec);
      REQUIRE(d.series.size() == spec.length);
      REQUIRE(d.segments.size() == spec.segments);
      CHECK(eval::to_events(d.labels) == d.segments);
      for (const auto& e : d.segments.events) {
        CHECK(e.end - e.start >= spec.min_segment);
        CHECK(e.end - e.start <= spec.max_segment);
      }
    }
    spec.segments = 1000;
    CHECK_THROWS_AS(synth::level_shift_series(spec), Error);
  }

  TEST_CASE("score covers every timestep with values in [0,1]") {
    Fixture fx(2000);
    const auto in = tp::prepare(fx.config);
    const auto r = tp::score(in, fx.config);
    REQUIRE(r.scores.size() == 2000);
    for (double s : r.scores.scores) {
      CHECK(s >= 0.0);
      CHECK(s <= 1.0);
    }
    CHECK(r.batches.size() == r.partition.batches.size());
  }

  TEST_CASE("thread count does not change the scores") {
    Fixture fx;
    const auto in = tp::prepare(fx.config);
    auto one = fx.config;
    auto many = fx.config;
    many.jobs = 4;
    CHECK(tp::score(in, one).scores.scores == tp::score(in, many).scores.scores);
  }

  TEST_CASE("detect is reproducible and evaluates against labels") {
    Fixture fx;
    const auto in = tp::prepare(fx.config);
    const auto a = tp::detect(in, fx.config);
    const auto b = tp::detect(in, fx.config);
    CHECK(a.scored.scores.scores == b.scored.scores.scores);
    CHECK(a.threshold.delta == b.threshold.delta);
    REQUIRE(a.report.has_value());
    CHECK(a.report->f1 >= 0.0);
    CHECK(a.anomaly_ratio.value() == doctest::Approx(eval::summarize(fx.data.labels)));
    CHECK(a.predictions.size() == 2048);
  }

  TEST_CASE("constant series scores zero everywhere") {
    support::TempDir dir;
    io::TimeSeries flat;
    flat.values.assign(1000, 4.25);
    io::write_series_csv(flat, dir / "flat.csv");
    tp::RunConfig c;
    c.series = dir / "flat.csv";
    c.reference_embedder = true;
    c.window = 100;
    c.batch_windows = 2;
    for (auto adapter : {adapt::Adapter::Spectral, adapt::Adapter::Mean, adapt::Adapter::Lof}) {
      c.adapter.adapter = adapter;
      const auto r = tp::score(tp::prepare(c), c);
      for (double s : r.scores.scores) CHECK(s == 0.0);
      for (const auto& b : r.batches) CHECK(b.zero_rows == b.rows);
    }
  }

  TEST_CASE("global scope normalises the whole series") {
    Fixture fx;
    fx.config.normalize_scope = tp::NormalizeScope::Global;
    const auto r = tp::score(tp::prepare(fx.config), fx.config);
    const auto [lo, hi] = std::minmax_element(r.scores.scores.begin(), r.scores.scores.end());
    CHECK(*lo == 0.0);
    CHECK(*hi == doctest::Approx(1.0).epsilon(1e-8));
  }

  TEST_CASE("calibration scores fix the threshold") {
    Fixture fx;
    std::vector<double> calib(5000);
    std::mt19937_64 rng(3);
    for (auto& v : calib) v = std::uniform_real_distribution<double>(0.0, 0.5)(rng);
    report::write_scores_csv(calib, fx.dir / "calib.csv");
    fx.config.calibration = fx.dir / "calib.csv";
    const auto r = tp::detect(tp::prepare(fx.config), fx.config);
    CHECK(r.threshold.delta == thresh::spot_threshold(calib, fx.config.spot_q, fx.config.spot_init).delta);
  }

  TEST_CASE("embedding file input matches the reference embedder") {
    Fixture fx;
    const auto in = tp::prepare(fx.config);
    embed::write_embeddings(in.embeddings, fx.dir / "emb.them");
    auto c = fx.config;
    c.reference_embedder = false;
    c.embeddings = fx.dir / "emb.them";
    CHECK(tp::score(tp::prepare(c), c).scores.scores == tp::score(in, fx.config).scores.scores);

    c.stride = 64;  // overlapping windows need twice as many rows
    CHECK_THROWS_AS(tp::prepare(c), Error);
  }

  TEST_CASE("configuration validation") {
    tp::RunConfig c;
    c.series = "x.csv";
    CHECK_THROWS_AS(c.validate(), Error);  // no embedding source
    c.reference_embedder = true;
    c.validate();
    c.embeddings = "e.them";
    CHECK_THROWS_AS(c.validate(), Error);
    c.embeddings.reset();
    c.spot_q = 1.0;
    CHECK_THROWS_AS(c.validate(), Error);
    c.spot_q = 1e-3;
    c.jobs = 0;
    CHECK_THROWS_AS(c.validate(), Error);
  }

  TEST_CASE("grid expansion") {
    tp::RunConfig base;
    tp::SweepGrid g;
    CHECK(tp::expand_grid(base, g).size() == 1);
    g.batch_windows = {1, 4, 16};
    g.k = {2, 5};
    g.alpha = {0.0, 0.1};
    const auto pts = tp::expand_grid(base, g);
    REQUIRE(pts.size() == 12);
    CHECK(pts[0].batch_windows == 1);
    CHECK(pts[0].adapter.spectral.k == 2);
    CHECK(pts[1].adapter.trimmed.alpha == 0.1);
    CHECK(pts[11].batch_windows == 16);
    CHECK(pts[11].adapter.spectral.k == 5);
  }

  TEST_CASE("sweep rows come back in grid order and record failures") {
    Fixture fx(1024);
    const auto in = tp::prepare(fx.config);
    tp::SweepGrid g;
    g.batch_windows = {1, 4};
    g.k = {2, 600};
    const auto rows = tp::sweep(in, tp::expand_grid(fx.config, g), 2);
    REQUIRE(rows.size() == 4);
    CHECK(rows[0].error.empty());
    CHECK(rows[0].f1.has_value());
    CHECK_FALSE(rows[3].error.empty());  // k larger than the batch
    CHECK_FALSE(rows[3].f1.has_value());
    const auto single = tp::sweep(in, tp::expand_grid(fx.config, g), 1);
    for (std::size_t i = 0; i < rows.size(); ++i) CHECK(single[i].f1 == rows[i].f1);
  }

  TEST_CASE("score CSV round trip is exact") {
    support::TempDir dir;
    std::mt19937_64 rng(9);
    std::vector<double> s(500);
    for (auto& v : s) v = std::ldexp(std::uniform_real_distribution<double>(0.0, 1.0)(rng), -static_cast<int>(rng() % 40));
    s[0] = 0.0;
    s[1] = 1.0;
    report::write_scores_csv(s, dir / "s.csv");
    CHECK(report::read_scores_csv(dir / "s.csv") == s);
  }

  TEST_CASE("report JSON uses nulls for empty truth") {
    eval::AffiliationReport r;
    r.empty_truth = true;
    const auto j = report::affiliation_json(r, 0.0);
    CHECK(j["f1"].is_null());
    CHECK(j["recall"].is_null());
    support::TempDir dir;
    report::write_json(j, dir / "r.json");
    CHECK(report::read_json(dir / "r.json") == j);
  }

  TEST_CASE("config echo names every flag") {
    tp::RunConfig c;
    c.series = "a.csv";
    c.reference_embedder = true;
    const auto j = report::config_json(c);
    for (const char* key : {"series", "window", "stride", "batch-windows", "adapter", "k", "spot-q", "spot-init"})
      CHECK(j.contains(key));
    CHECK(j["stride"] == 512);
  }

  TEST_CASE("error categories map to exit classes") {
    CHECK(category_of(ErrorCode::EigensolveFailure) == ErrorCategory::Numerical);
    CHECK(category_of(ErrorCode::TooFewPeaks) == ErrorCategory::Numerical);
    CHECK(category_of(ErrorCode::MissingFile) == ErrorCategory::Input);
    CHECK(category_of(ErrorCode::NonFiniteValue) == ErrorCategory::Input);
  }
}
