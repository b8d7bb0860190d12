#include <doctest.h>

#include "support.hpp"
#include "tstdd/config.hpp"

using namespace tstdd;

TEST_CASE("defaults") {
  const PipelineConfig cfg;
  CHECK(cfg.ofsdi.alpha == 0.96);
  CHECK(cfg.svm.c == 30.0);
  CHECK(cfg.pca_dim == 256);
  CHECK(cfg.codebook_size == 4000);
  CHECK(cfg.llc.k_bases == 5);
  CHECK(cfg.llc.samples_per_video == 200);
  CHECK(cfg.whiten_retain == 0.99);
  CHECK(cfg.repeats == 5);
  CHECK(cfg.train_per_class == 30);
  CHECK(cfg.trajectory.length == 15);
  CHECK(cfg.streams.size() == 3);
  CHECK_NOTHROW(cfg.validate());
}

TEST_CASE("config text parses with comments and blank lines") {
  const PipelineConfig cfg = parse_config(
      "# desk settings\n"
      "codebook.size = 64\n"
      "\n"
      "svm.c=10   # inline comment\n"
      "streams = gt, lt\n"
      "ofsdi.init = zeros\n"
      "llc.pooling = sum\n"
      "seed = 42\n");
  CHECK(cfg.codebook_size == 64);
  CHECK(cfg.svm.c == 10.0);
  CHECK(cfg.streams == std::vector<Stream>{Stream::local_temporal, Stream::global_temporal});
  CHECK(cfg.ofsdi.init_mode == OfsdiInit::zeros);
  CHECK(cfg.llc.pooling == Pooling::sum);
  CHECK(cfg.seed == 42);
}

TEST_CASE("every setting round-trips through text") {
  PipelineConfig cfg;
  cfg.flow.smoothness_weight = 0.1 + 0.2;
  cfg.trajectory.static_threshold = 1.0 / 3.0;
  cfg.codebook_size = 77;
  cfg.streams = {Stream::spatial_temporal};
  cfg.train_fraction = 0.5;
  cfg.cache_dir = "some/where";
  const std::string text = format_kv(to_kv(cfg));
  const PipelineConfig back = parse_config(text);
  CHECK(format_kv(to_kv(back)) == text);
  CHECK(back.flow.smoothness_weight == cfg.flow.smoothness_weight);
  CHECK(back.trajectory.static_threshold == cfg.trajectory.static_threshold);
  CHECK(back.cache_dir == cfg.cache_dir);
}

TEST_CASE("malformed config text is rejected with its line number") {
  const auto unknown = [] { parse_config("seed = 1\nbogus.key = 3\n"); };
  CHECK(test::error_kind_of(unknown) == ErrorKind::invalid_argument);
  CHECK(test::error_text_of(unknown).find("config:2") != std::string::npos);
  CHECK(test::error_text_of(unknown).find("bogus.key") != std::string::npos);
  CHECK_THROWS_AS(parse_config("seed = 1\nseed = 2\n"), Error);
  CHECK_THROWS_AS(parse_config("seed 1\n"), Error);
  CHECK_THROWS_AS(parse_config("svm.c = abc\n"), Error);
  CHECK_THROWS_AS(parse_config("repeats = 0\n"), Error);
  CHECK_THROWS_AS(parse_config("streams = lt,lt\n"), Error);
  CHECK(test::error_kind_of([] { load_config("/nonexistent/cfg.txt"); }) == ErrorKind::io);
}

TEST_CASE("extraction settings exclude model settings") {
  PipelineConfig a, b;
  b.codebook_size = 12;
  b.svm.c = 1;
  b.seed = 99;
  CHECK(format_kv(extraction_kv(a)) == format_kv(extraction_kv(b)));
  b.mhi.tau = 9;
  CHECK(format_kv(extraction_kv(a)) != format_kv(extraction_kv(b)));
}

TEST_CASE("stream lists") {
  CHECK(format_stream_list(parse_stream_list("st,lt")) == "lt,st");
  CHECK(test::error_kind_of([] { parse_stream_list(""); }) == ErrorKind::invalid_argument);
  CHECK_THROWS_AS(parse_stream_list("lt,zz"), Error);
}
