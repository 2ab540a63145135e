#include <cmath>
#include <random>

#include "copaint/io.hpp"
#include "doctest.h"
#include "fixtures.hpp"

using namespace copaint;

namespace {

double q(std::mt19937_64& rng, double lo, double hi) {
  return quantize9(std::uniform_real_distribution<double>(lo, hi)(rng));
}

Rgb qcolor(std::mt19937_64& rng) { return {q(rng, 0, 1), q(rng, 0, 1), q(rng, 0, 1)}; }

SessionFile random_session(std::uint64_t seed, int strokes) {
  std::mt19937_64 rng(seed);
  SessionFile f;
  f.width = 97;
  f.height = 64;
  f.background = qcolor(rng);
  f.textures = {"aa11", "bb22"};
  for (int i = 0; i < strokes; ++i) {
    SessionEntry e;
    e.id = static_cast<std::uint64_t>(i + 1);
    if (i % 3 != 2) {
      StrokeRecord r;
      r.tool = i % 5 == 0 ? BrushMode{BrushTip{"aa11"}} : BrushMode{HardRound{}};
      r.base_size = q(rng, 1, 40);
      r.color = qcolor(rng);
      r.smoothing = i % 2 == 0;
      double t = 0;
      const int n = 1 + static_cast<int>(rng() % 12);
      for (int k = 0; k < n; ++k) {
        t = quantize9(t + q(rng, 0, 20));
        r.samples.push_back({q(rng, 0, 97), q(rng, 0, 64), q(rng, 0, 1), t});
      }
      e.record = r;
      if (i % 7 == 0) e.stamps = std::vector<Stamp>{Stamp::tip(r.tool, q(rng, 0, 97), q(rng, 0, 64), q(rng, 0.5, 9),
                                                                q(rng, -3.14, 3.14), q(rng, 0, 1), qcolor(rng))};
    } else {
      e.origin = i % 2 ? "completion" : "inpaint";
      std::vector<Stamp> st;
      for (int k = 0; k < 3; ++k)
        st.push_back(Stamp::gaussian(q(rng, 0, 97), q(rng, 0, 64), q(rng, 0.5, 9), q(rng, 0.5, 9),
                                     q(rng, -3.14, 3.14), qcolor(rng)));
      e.stamps = st;
    }
    f.strokes.push_back(std::move(e));
  }
  return f;
}

Canvas random_linear(std::uint64_t seed, int w, int h) {
  std::mt19937_64 rng(seed);
  return testing::random_canvas(rng, w, h);
}

}  // namespace

TEST_CASE("srgb transfer curve reference values") {
  CHECK(srgb_to_linear(128.0 / 255.0) == doctest::Approx(0.21586).epsilon(1e-4));
  CHECK(srgb_to_linear(0.0) == 0.0);
  CHECK(srgb_to_linear(1.0) == doctest::Approx(1.0));
  CHECK(srgb_to_linear(0.04) == doctest::Approx(0.04 / 12.92));
  for (int i = 0; i <= 100; ++i) CHECK(linear_to_srgb(srgb_to_linear(i / 100.0)) == doctest::Approx(i / 100.0));
}

TEST_CASE("png color round trips stay within half a code value") {
  for (int depth : {8, 16}) {
    const Canvas c = random_linear(depth, 23, 17);
    const Canvas back = import_image(export_image(c, depth));
    const double step = depth == 8 ? 1.0 / 255 : 1.0 / 65535;
    double worst = 0;
    for (std::size_t i = 0; i < c.size(); ++i)
      for (int ch = 0; ch < 3; ++ch)
        worst = std::max(worst, std::abs(linear_to_srgb(back.data()[i][ch]) - linear_to_srgb(c.data()[i][ch])));
    CHECK(worst <= 0.5 * step + 1e-12);
  }
}

TEST_CASE("decoded code values re-encode to the same bytes") {
  const Bytes png = export_image(random_linear(4, 16, 9));
  const Bytes again = export_image(import_image(png));
  CHECK(again == png);
  const PngRaster r = decode_png(png);
  CHECK(r.width == 16);
  CHECK(r.height == 9);
  CHECK(r.channels == 3);
}

TEST_CASE("paletted and gray rasters") {
  PngRaster p;
  p.width = 3;
  p.height = 2;
  p.channels = 1;
  p.paletted = true;
  p.palette = {{0, 0, 0}, {255, 0, 0}, {0, 0, 255}};
  p.samples = {0, 1, 2, 2, 1, 0};
  const Bytes png = encode_png(p);
  const PngRaster back = decode_png(png);
  CHECK(back.paletted);
  CHECK(back.samples == p.samples);
  const LabelMap labels = decode_labels(png);
  CHECK(labels(2, 0) == 2);
  const Canvas c = import_image(png);
  CHECK(c(1, 0) == Rgb{1, 0, 0});

  GrayImage g(5, 4);
  for (int i = 0; i < 20; ++i) g.data()[i] = i / 19.0;
  const GrayImage g2 = import_gray(export_gray(g, 16));
  for (int i = 0; i < 20; ++i) CHECK(g2.data()[i] == doctest::Approx(g.data()[i]).epsilon(1e-4));
}

TEST_CASE("corrupt png input is rejected") {
  Bytes png = export_image(Canvas(8, 8, Rgb{0.2, 0.4, 0.6}));
  CHECK_THROWS_AS(decode_png(Bytes(png.begin(), png.begin() + png.size() / 2)), FormatError);
  CHECK_THROWS_AS(decode_png(Bytes{1, 2, 3, 4}), FormatError);
}

TEST_CASE("sha256 and base64") {
  const std::string abc = "abc";
  const std::span<const std::uint8_t> bytes(reinterpret_cast<const std::uint8_t*>(abc.data()), abc.size());
  CHECK(sha256_hex(bytes) == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  CHECK(base64_encode(bytes) == "YWJj");
  CHECK(base64_decode("YWJj") == Bytes(bytes.begin(), bytes.end()));
  const Bytes odd{0, 255, 7, 9, 1};
  CHECK(base64_decode(base64_encode(odd)) == odd);
  CHECK_THROWS(base64_decode("@@@@"));
}

TEST_CASE("quantize9 keeps nine significant digits and is idempotent") {
  CHECK(quantize9(0.1234567891234) == 0.123456789);
  CHECK(quantize9(quantize9(3.14159265358979)) == quantize9(3.14159265358979));
}

TEST_CASE("session files round trip field-exactly over 100 strokes") {
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    const SessionFile f = random_session(seed, 100);
    const std::string text = save_session(f);
    const SessionFile back = load_session(text);
    CHECK(back == f);
    CHECK(save_session(back) == text);
  }
}

TEST_CASE("session files are byte-deterministic") {
  const SessionFile f = random_session(9, 10);
  CHECK(save_session(f) == save_session(f));
}

TEST_CASE("unknown fields survive a rewrite") {
  SessionFile f = random_session(4, 3);
  Json j = Json::parse(save_session(f));
  j["app_state"] = {{"zoom", 2}};
  j["strokes"][1]["layer"] = "ink";
  const SessionFile back = load_session(j.dump());
  CHECK(back.extra["app_state"]["zoom"] == 2);
  CHECK(back.strokes[1].extra["layer"] == "ink");
  const Json again = Json::parse(save_session(back));
  CHECK(again["app_state"] == j["app_state"]);
  CHECK(again["strokes"][1]["layer"] == "ink");
}

TEST_CASE("structural errors name the field") {
  const std::string text = save_session(random_session(5, 4));
  CHECK_THROWS_AS(load_session(text.substr(0, text.size() / 2)), FormatError);
  Json j = Json::parse(text);
  j["strokes"][0]["record"].erase("samples");
  try {
    load_session(j.dump());
    FAIL("expected a format error");
  } catch (const FormatError& e) {
    CHECK(std::string(e.what()).find("strokes[0].record.samples") == 0);
  }
  j = Json::parse(text);
  j["version"] = 99;
  CHECK_THROWS_AS(load_session(j.dump()), FormatError);
  j = Json::parse(text);
  j["format"] = "something-else";
  CHECK_THROWS_AS(load_session(j.dump()), FormatError);
}

TEST_CASE("out-of-range values are clamped with a warning") {
  Json j = Json::parse(save_session(random_session(6, 2)));
  j["strokes"][0]["record"]["samples"][0][2] = 1.5;
  j["strokes"][0]["record"]["color"][1] = -0.25;
  LoadWarnings w;
  const SessionFile f = load_session(j.dump(), &w);
  CHECK(f.strokes[0].record->samples[0].pressure == 1.0);
  CHECK(f.strokes[0].record->color.g == 0.0);
  CHECK(w.clamped.size() == 2);
  j["strokes"][0]["record"]["base_size"] = -3;
  CHECK_THROWS_AS(load_session(j.dump()), FormatError);
}

TEST_CASE("plans round trip field-exactly") {
  std::mt19937_64 rng(8);
  for (BrushMode mode : {BrushMode{Gaussian2D{}}, BrushMode{HardRound{}}, BrushMode{BrushTip{"cafe"}}}) {
    StrokePlan p;
    p.width = 40;
    p.height = 30;
    p.mode = mode;
    for (int i = 0; i < 50; ++i) {
      p.stamps.push_back(is_tip_mode(mode) ? Stamp::tip(mode, q(rng, 0, 40), q(rng, 0, 30), q(rng, 0.5, 8),
                                                        q(rng, -3, 3), q(rng, 0, 1), qcolor(rng))
                                           : Stamp::gaussian(q(rng, 0, 40), q(rng, 0, 30), q(rng, 0.5, 8),
                                                             q(rng, 0.5, 8), q(rng, -3, 3), qcolor(rng)));
      p.labels.push_back(i / 10);
    }
    const std::string text = save_plan(p);
    CHECK(load_plan(text) == p);
    CHECK(save_plan(load_plan(text)) == text);
  }
  StrokePlan mixed;
  mixed.width = mixed.height = 4;
  mixed.stamps = {Stamp::tip(HardRound{}, 1, 1, 1, 0, 1, {})};
  CHECK_THROWS(save_plan(mixed));  // a Gaussian plan with a hard-round stamp
}

TEST_CASE("order table text") {
  const OrderTable t = parse_order_table("# comment\n0 background\n3 skin tone  \nignore 9\n\n1 hair # trailing\n");
  REQUIRE(t.size() == 3);
  CHECK(t.entries()[1] == OrderTable::Entry{3, "skin tone"});
  CHECK(t.index_of(1) == 2u);
  CHECK_FALSE(t.index_of(9));
  CHECK(t.is_ignored(9));
  CHECK(parse_order_table(format_order_table(t)) == t);
  CHECK_THROWS_AS(parse_order_table("1 a\n1 b\n"), FormatError);
  CHECK_THROWS_AS(parse_order_table("x a\n"), FormatError);
  std::string many;
  for (int i = 0; i < 16; ++i) many += std::to_string(i) + " l\n";
  CHECK_THROWS_AS(parse_order_table(many), FormatError);
}

TEST_CASE("normal maps") {
  NormalMap n(3, 1);
  n(0, 0) = {0, 0, 1};
  n(1, 0) = {0.6, 0, 0.8};
  n(2, 0) = {-1 / std::sqrt(3.0), 1 / std::sqrt(3.0), 1 / std::sqrt(3.0)};
  const NormalMap back = decode_normals(encode_normals(n));
  for (int x = 0; x < 3; ++x)
    for (int c = 0; c < 3; ++c) CHECK(back(x, 0)[c] == doctest::Approx(n(x, 0)[c]).epsilon(1e-4).scale(1));

  PngRaster mid;
  mid.width = 1;
  mid.height = 1;
  mid.channels = 3;
  mid.samples = {128, 127, 128};
  CHECK(decode_normals(encode_png(mid))(0, 0) == Normal{0, 0, 1});
  mid.samples = {255, 128, 128};
  CHECK(decode_normals(encode_png(mid))(0, 0)[0] == doctest::Approx(1.0).epsilon(1e-3));
}

TEST_CASE("attention normalization") {
  GrayImage a(2, 2);
  a.data()[0] = 0.2;
  a.data()[1] = 0.6;
  a.data()[2] = 0.4;
  a.data()[3] = 0.2;
  const AttentionMap n = normalize_attention(a);
  CHECK(n.data()[0] == 0.0);
  CHECK(n.data()[1] == 1.0);
  CHECK(n.data()[2] == doctest::Approx(0.5));
  const AttentionMap flat = normalize_attention(GrayImage(3, 3, 0.7));
  for (double v : flat.data()) CHECK(v == 1.0);
}

TEST_CASE("guidance maps load from the fixture and reject mismatches") {
  const auto p = testing::load_portrait();
  CHECK(p.maps.labels.same_size(p.target));
  CHECK(p.maps.order.size() == 6);
  const auto dir = testing::data_dir() / "portrait";
  const Bytes small = export_gray(GrayImage(4, 4, 0.5));
  try {
    load_maps(read_file(dir / "labels.png"), read_file(dir / "normals.png"), small,
              testing::read_text(dir / "order.txt"));
    FAIL("expected size mismatch");
  } catch (const FormatError& e) {
    CHECK(std::string(e.what()).find("attention: size 4x4") == 0);
  }
  CHECK_THROWS_AS(load_maps(read_file(dir / "labels.png"), read_file(dir / "normals.png"),
                            read_file(dir / "attention.png"), "0 background\n1 clothes\n"),
                  FormatError);
}
