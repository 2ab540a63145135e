#include <algorithm>
#include <cmath>
#include <sstream>

#include "copaint/io.hpp"

namespace copaint {

OrderTable::OrderTable(std::vector<Entry> entries, std::vector<int> ignored)
    : entries_(std::move(entries)), ignored_(std::move(ignored)) {
  if (entries_.size() > kMaxLabels)
    throw std::invalid_argument("order table: more than 15 labels");
  std::vector<int> ids;
  for (const auto& e : entries_) ids.push_back(e.id);
  ids.insert(ids.end(), ignored_.begin(), ignored_.end());
  std::sort(ids.begin(), ids.end());
  if (std::adjacent_find(ids.begin(), ids.end()) != ids.end())
    throw std::invalid_argument("order table: duplicate label id");
}

std::optional<std::size_t> OrderTable::index_of(int id) const {
  for (std::size_t i = 0; i < entries_.size(); ++i)
    if (entries_[i].id == id) return i;
  return std::nullopt;
}

bool OrderTable::is_ignored(int id) const {
  return std::find(ignored_.begin(), ignored_.end(), id) != ignored_.end();
}

OrderTable parse_order_table(std::string_view text) {
  std::vector<OrderTable::Entry> entries;
  std::vector<int> ignored;
  std::istringstream in{std::string(text)};
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    std::istringstream ls(line);
    std::string first;
    if (!(ls >> first)) continue;
    const std::string where = "order table line " + std::to_string(lineno);
    auto parse_id = [&](const std::string& s) {
      std::size_t used = 0;
      int id = 0;
      try {
        id = std::stoi(s, &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used != s.size() || id < 0) throw FormatError(where + ": bad label id '" + s + "'");
      return id;
    };
    if (first == "ignore") {
      std::string id;
      if (!(ls >> id)) throw FormatError(where + ": ignore needs an id");
      ignored.push_back(parse_id(id));
      continue;
    }
    OrderTable::Entry e;
    e.id = parse_id(first);
    std::getline(ls >> std::ws, e.name);
    while (!e.name.empty() && std::isspace(static_cast<unsigned char>(e.name.back())))
      e.name.pop_back();
    entries.push_back(std::move(e));
  }
  try {
    return OrderTable(std::move(entries), std::move(ignored));
  } catch (const std::invalid_argument& ex) {
    throw FormatError(ex.what());
  }
}

std::string format_order_table(const OrderTable& table) {
  std::string out;
  for (const auto& e : table.entries()) {
    out += std::to_string(e.id);
    if (!e.name.empty()) out += " " + e.name;
    out += "\n";
  }
  for (int id : table.ignored()) out += "ignore " + std::to_string(id) + "\n";
  return out;
}

LabelMap decode_labels(std::span<const std::uint8_t> png) {
  const PngRaster r = decode_png(png);
  LabelMap out(r.width, r.height);
  for (int y = 0; y < r.height; ++y)
    for (int x = 0; x < r.width; ++x) out(x, y) = r.at(x, y, 0);
  return out;
}

NormalMap decode_normals(std::span<const std::uint8_t> png) {
  const PngRaster r = decode_png(png);
  if (r.paletted || r.channels < 3) throw FormatError("normals: expected an RGB PNG");
  const double m = r.max_value();
  NormalMap out(r.width, r.height);
  for (int y = 0; y < r.height; ++y)
    for (int x = 0; x < r.width; ++x) {
      Normal n{};
      for (int ch = 0; ch < 3; ++ch) n[ch] = 2.0 * (r.at(x, y, ch) / m) - 1.0;
      const double len = std::sqrt(n[0] * n[0] + n[1] * n[1] + n[2] * n[2]);
      // Mid-gray codes sit within one step of the origin.
      out(x, y) = len >= 2.0 / m ? Normal{n[0] / len, n[1] / len, n[2] / len} : Normal{0, 0, 1};
    }
  return out;
}

Bytes encode_normals(const NormalMap& normals) {
  PngRaster r;
  r.width = normals.width();
  r.height = normals.height();
  r.channels = 3;
  r.bit_depth = 16;
  for (const Normal& n : normals.data())
    for (int ch = 0; ch < 3; ++ch)
      r.samples.push_back(static_cast<std::uint16_t>(
          std::lround(std::clamp((n[ch] + 1.0) / 2.0, 0.0, 1.0) * 65535.0)));
  return encode_png(r);
}

AttentionMap normalize_attention(const GrayImage& raw) {
  if (raw.empty()) return raw;
  const auto [lo, hi] = std::minmax_element(raw.data().begin(), raw.data().end());
  const double a = *lo;
  const double b = *hi;
  AttentionMap out(raw.width(), raw.height(), 1.0);
  if (b > a)
    for (std::size_t i = 0; i < raw.size(); ++i) out.data()[i] = (raw.data()[i] - a) / (b - a);
  return out;
}

GuidanceMaps load_maps(std::span<const std::uint8_t> label_png,
                       std::span<const std::uint8_t> normal_png,
                       std::span<const std::uint8_t> attention_png, std::string_view order_table) {
  GuidanceMaps m;
  m.order = parse_order_table(order_table);
  if (m.order.empty()) throw FormatError("order table: no labels");
  m.labels = decode_labels(label_png);
  m.normals = decode_normals(normal_png);
  m.attention = normalize_attention(import_gray(attention_png));
  auto dims = [](int w, int h) { return std::to_string(w) + "x" + std::to_string(h); };
  if (!m.labels.same_size(m.normals))
    throw FormatError("normals: size " + dims(m.normals.width(), m.normals.height()) +
                      " differs from labels " + dims(m.labels.width(), m.labels.height()));
  if (!m.labels.same_size(m.attention))
    throw FormatError("attention: size " + dims(m.attention.width(), m.attention.height()) +
                      " differs from labels " + dims(m.labels.width(), m.labels.height()));
  for (int y = 0; y < m.labels.height(); ++y)
    for (int x = 0; x < m.labels.width(); ++x) {
      const int id = m.labels(x, y);
      if (!m.order.index_of(id) && !m.order.is_ignored(id))
        throw FormatError("labels: id " + std::to_string(id) + " at (" + std::to_string(x) +
                          ", " + std::to_string(y) + ") is not in the order table");
    }
  return m;
}

}  // namespace copaint
