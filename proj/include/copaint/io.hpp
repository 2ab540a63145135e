#pragma once

// File formats: PNG rasters with sRGB handling, session and stroke plan JSON,
// guidance map loading, hashing and base64.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "copaint/maps.hpp"
#include "copaint/stroke.hpp"
#include "json.hpp"

namespace copaint {

using Bytes = std::vector<std::uint8_t>;
using Json = nlohmann::ordered_json;

/// Structurally invalid input. The message starts with the offending field
/// path when there is one, e.g. "strokes[2].record.samples: missing".
class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

Bytes read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);
void write_file(const std::filesystem::path& path, std::string_view text);

std::string sha256_hex(std::span<const std::uint8_t> bytes);
std::string base64_encode(std::span<const std::uint8_t> bytes);
Bytes base64_decode(std::string_view text);

// ---- PNG ----

/// Decoded PNG samples without any color interpretation. Paletted images keep
/// their indices (channels = 1) and carry the palette.
struct PngRaster {
  int width = 0;
  int height = 0;
  int channels = 0;   // 1 gray, 2 gray+alpha, 3 rgb, 4 rgba
  int bit_depth = 8;  // 8 or 16; paletted rasters report 8
  bool paletted = false;
  std::vector<std::array<std::uint8_t, 3>> palette;
  std::vector<std::uint16_t> samples;  // row-major, interleaved

  int max_value() const { return bit_depth == 16 ? 65535 : 255; }
  std::uint16_t at(int x, int y, int ch) const {
    return samples[(static_cast<std::size_t>(y) * width + x) * channels + ch];
  }
};

/// Accepts 8/16-bit gray, gray+alpha, rgb, rgba and 1-8 bit paletted PNGs.
PngRaster decode_png(std::span<const std::uint8_t> bytes);
/// Writes gray/gray+alpha/rgb/rgba at 8 or 16 bits, or a paletted raster.
Bytes encode_png(const PngRaster& raster);

double srgb_to_linear(double v);
double linear_to_srgb(double v);

/// Decodes through the sRGB transfer curve into linear RGB. Gray replicates,
/// palettes expand and alpha is dropped.
Canvas import_image(std::span<const std::uint8_t> png);
/// Encodes linear RGB through the inverse sRGB curve, rounding to the nearest
/// code value. Values are clamped to [0,1] first.
Bytes export_image(const Canvas& canvas, int bit_depth = 8);

/// Raw (non color-managed) gray values scaled to [0,1]; color inputs use
/// Rec. 709 weights. Used for brush tips and attention maps.
GrayImage import_gray(std::span<const std::uint8_t> png);
Bytes export_gray(const GrayImage& image, int bit_depth = 8);

// ---- guidance maps ----

/// Text form: one "<id> <name>" per line, coarsest first; "ignore <id>"
/// marks ids to skip; '#' starts a comment.
OrderTable parse_order_table(std::string_view text);
std::string format_order_table(const OrderTable& table);

/// Palette index for paletted PNGs, otherwise the first channel's value.
LabelMap decode_labels(std::span<const std::uint8_t> png);
/// [0,1]^3 encoded normals mapped to [-1,1]^3 and renormalized. Vectors
/// shorter than one code step (mid-gray) decode to (0, 0, 1).
NormalMap decode_normals(std::span<const std::uint8_t> png);
Bytes encode_normals(const NormalMap& normals);
/// Min-max scaled to [0,1]; a constant map becomes all ones.
AttentionMap normalize_attention(const GrayImage& raw);

struct GuidanceMaps {
  LabelMap labels;
  OrderTable order;
  NormalMap normals;
  AttentionMap attention;
};

/// Throws FormatError on mismatched dimensions or a label id that is neither
/// in the table nor ignored.
GuidanceMaps load_maps(std::span<const std::uint8_t> label_png,
                       std::span<const std::uint8_t> normal_png,
                       std::span<const std::uint8_t> attention_png, std::string_view order_table);

// ---- JSON documents ----

inline constexpr int kSessionVersion = 1;
inline constexpr int kPlanVersion = 1;
inline constexpr std::string_view kSessionExtension = ".pcsession.json";
inline constexpr std::string_view kPlanExtension = ".pcplan.json";

/// Floats are written with 9 significant digits. Values that already satisfy
/// quantize9(v) == v round-trip exactly.
double quantize9(double v);

/// One committed history entry. User strokes carry their record; stamps are
/// present when they cannot be regenerated from the record.
struct SessionEntry {
  std::uint64_t id = 0;
  std::string origin = "user";
  std::optional<StrokeRecord> record;
  std::optional<std::vector<Stamp>> stamps;
  Json extra = Json::object();  // unknown keys, kept on rewrite

  bool operator==(const SessionEntry&) const = default;
};

struct SessionFile {
  int version = kSessionVersion;
  int width = 0;
  int height = 0;
  Rgb background{1.0, 1.0, 1.0};
  std::vector<SessionEntry> strokes;
  std::vector<std::string> textures;  // content hashes of brush tips
  Json extra = Json::object();

  bool operator==(const SessionFile&) const = default;
};

/// Out-of-range numeric fields that were clamped while loading.
struct LoadWarnings {
  std::vector<std::string> clamped;  // field paths
};

std::string save_session(const SessionFile& session);
SessionFile load_session(std::string_view text, LoadWarnings* warnings = nullptr);

std::string save_plan(const StrokePlan& plan);
StrokePlan load_plan(std::string_view text, LoadWarnings* warnings = nullptr);

/// Stamp as a JSON object with mode-specific keys.
Json stamp_to_json(const Stamp& s);
Stamp stamp_from_json(const Json& j, const std::string& path, LoadWarnings* warnings);

Json stroke_to_json(const StrokeRecord& r);
StrokeRecord stroke_from_json(const Json& j, const std::string& path, LoadWarnings* warnings);

}  // namespace copaint
