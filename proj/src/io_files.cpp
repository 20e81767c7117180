#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

#include "hessflow/io.hpp"

namespace hessflow::io {

namespace {

template <typename T>
void put(std::string& out, T value) {
  static_assert(std::is_trivially_copyable_v<T>);
  char bytes[sizeof(T)];
  std::memcpy(bytes, &value, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes, bytes + sizeof(T));
  out.append(bytes, sizeof(T));
}

class ByteReader {
 public:
  explicit ByteReader(const std::string& bytes) : b_(bytes) {}

  template <typename T>
  T get(const char* what) {
    if (pos_ + sizeof(T) > b_.size())
      throw std::runtime_error(std::string("snapshot: truncated while reading ") + what);
    char bytes[sizeof(T)];
    std::memcpy(bytes, b_.data() + pos_, sizeof(T));
    if constexpr (std::endian::native == std::endian::big) std::reverse(bytes, bytes + sizeof(T));
    pos_ += sizeof(T);
    T v;
    std::memcpy(&v, bytes, sizeof(T));
    return v;
  }

  std::size_t remaining() const { return b_.size() - pos_; }

 private:
  const std::string& b_;
  std::size_t pos_ = 0;
};

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& data) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  out.write(data.data(), static_cast<std::streamsize>(data.size()));
  if (!out) throw std::runtime_error("write failed for '" + path + "'");
}

}  // namespace

std::string encode_snapshot(const ScalarField& field) {
  const Grid& g = field.grid;
  g.validate();
  if (field.values.size() != g.size()) throw std::invalid_argument("snapshot: field size mismatch");
  std::string out = "HFLD";
  put<std::uint32_t>(out, kSnapshotVersion);
  put<std::uint32_t>(out, static_cast<std::uint32_t>(g.n));
  for (int a = 0; a < g.n; ++a) put<std::uint32_t>(out, static_cast<std::uint32_t>(g.shape[a]));
  for (int a = 0; a < g.n; ++a) put<double>(out, g.spacing[a]);
  put<std::uint32_t>(out, static_cast<std::uint32_t>(g.topology));
  put<double>(out, field.time);
  out.reserve(out.size() + 8 * field.values.size());
  for (double v : field.values) put<double>(out, v);
  return out;
}

ScalarField decode_snapshot(const std::string& bytes) {
  if (bytes.size() < 4 || bytes.compare(0, 4, "HFLD") != 0)
    throw std::runtime_error("snapshot: bad magic");
  const std::string body = bytes.substr(4);
  ByteReader r(body);
  const auto version = r.get<std::uint32_t>("version");
  if (version != kSnapshotVersion)
    throw std::runtime_error("snapshot: unsupported version " + std::to_string(version));
  const auto n = r.get<std::uint32_t>("n");
  if (n < 2 || n > 3) throw std::runtime_error("snapshot: dimension must be 2 or 3");
  Grid g;
  g.n = static_cast<int>(n);
  for (std::uint32_t a = 0; a < n; ++a) g.shape[a] = static_cast<int>(r.get<std::uint32_t>("shape"));
  for (std::uint32_t a = 0; a < n; ++a) g.spacing[a] = r.get<double>("spacing");
  const auto topo = r.get<std::uint32_t>("topology");
  if (topo > 1) throw std::runtime_error("snapshot: unknown topology code " + std::to_string(topo));
  g.topology = static_cast<Topology>(topo);
  const double time = r.get<double>("time");
  g.validate();
  if (r.remaining() != 8 * g.size())
    throw std::runtime_error("snapshot: payload holds " + std::to_string(r.remaining()) +
                             " bytes, expected " + std::to_string(8 * g.size()));
  ScalarField f(g, 0.0, time);
  for (double& v : f.values) v = r.get<double>("payload");
  return f;
}

void write_snapshot(const std::string& path, const ScalarField& field) {
  write_file(path, encode_snapshot(field));
}

ScalarField read_snapshot(const std::string& path) { return decode_snapshot(read_file(path)); }

std::string format_monitor_csv(const std::vector<MonitorRow>& rows) {
  std::string out = std::string(kMonitorHeader) + "\n";
  for (const auto& r : rows) {
    out += format_double(r.t) + "," + format_double(r.sup_u) + "," + format_double(r.sup_grad_u) +
           "," + format_double(r.sup_hess_u) + "," + format_double(r.sup_ut) + ",";
    if (r.w) out += format_double(*r.w);
    out += ",";
    if (r.slack) out += format_double(*r.slack);
    out += "\n";
  }
  return out;
}

void write_monitor_csv(const std::string& path, const std::vector<MonitorRow>& rows) {
  write_file(path, format_monitor_csv(rows));
}

CsvTable parse_csv(const std::string& text) {
  CsvTable table;
  std::istringstream is(text);
  std::string line;
  int number = 0;
  auto split = [](const std::string& s) {
    std::vector<std::string> cells;
    std::string cell;
    std::istringstream ls(s);
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    if (!s.empty() && s.back() == ',') cells.emplace_back();
    return cells;
  };
  while (std::getline(is, line)) {
    ++number;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto cells = split(line);
    if (table.columns.empty()) {
      table.columns = cells;
      continue;
    }
    if (cells.size() != table.columns.size())
      throw ConfigError("csv: expected " + std::to_string(table.columns.size()) + " cells", number);
    std::vector<std::optional<double>> row;
    for (const auto& c : cells) {
      if (c.empty()) {
        row.emplace_back();
        continue;
      }
      char* end = nullptr;
      const double v = std::strtod(c.c_str(), &end);
      if (end != c.c_str() + c.size()) throw ConfigError("csv: bad number '" + c + "'", number);
      row.emplace_back(v);
    }
    table.rows.push_back(std::move(row));
  }
  if (table.columns.empty()) throw ConfigError("csv: missing header", 0);
  return table;
}

std::string render_svg_report(const CsvTable& table) {
  const int panel_w = 420, panel_h = 240, margin = 50;
  const std::size_t series = table.columns.size() > 1 ? table.columns.size() - 1 : 0;
  const int cols = 2;
  const int rows = static_cast<int>((series + cols - 1) / cols);
  const int width = cols * (panel_w + margin) + margin;
  const int height = std::max(1, rows) * (panel_h + margin) + margin;

  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
      << "\" viewBox=\"0 0 " << width << " " << height << "\" font-family=\"sans-serif\" font-size=\"11\">\n";
  svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";

  for (std::size_t s = 0; s < series; ++s) {
    const int ox = margin + static_cast<int>(s % cols) * (panel_w + margin);
    const int oy = margin + static_cast<int>(s / cols) * (panel_h + margin);
    std::vector<std::pair<double, double>> pts;
    for (const auto& row : table.rows)
      if (row[0] && row[s + 1] && std::isfinite(*row[0]) && std::isfinite(*row[s + 1]))
        pts.emplace_back(*row[0], *row[s + 1]);

    const std::string& name = table.columns[s + 1];
    svg << "<g class=\"series\" data-name=\"" << name << "\" data-points=\"" << pts.size() << "\">\n";
    svg << "<rect x=\"" << ox << "\" y=\"" << oy << "\" width=\"" << panel_w << "\" height=\""
        << panel_h << "\" fill=\"none\" stroke=\"#888\"/>\n";
    svg << "<text x=\"" << ox << "\" y=\"" << oy - 8 << "\">" << name << " vs "
        << table.columns[0] << "</text>\n";
    if (!pts.empty()) {
      double x0 = pts.front().first, x1 = x0, y0 = pts.front().second, y1 = y0;
      for (const auto& [x, y] : pts) {
        x0 = std::min(x0, x);
        x1 = std::max(x1, x);
        y0 = std::min(y0, y);
        y1 = std::max(y1, y);
      }
      if (x1 == x0) x1 = x0 + 1;
      if (y1 == y0) y1 = y0 + 1;
      auto px = [&](double x) { return ox + (x - x0) / (x1 - x0) * panel_w; };
      auto py = [&](double y) { return oy + panel_h - (y - y0) / (y1 - y0) * panel_h; };
      svg << "<text x=\"" << ox + 4 << "\" y=\"" << oy + 12 << "\" fill=\"#555\">max "
          << format_double(y1) << "</text>\n";
      svg << "<text x=\"" << ox + 4 << "\" y=\"" << oy + panel_h - 4 << "\" fill=\"#555\">min "
          << format_double(y0) << "</text>\n";
      svg << "<polyline fill=\"none\" stroke=\"#1f77b4\" stroke-width=\"1.5\" points=\"";
      for (const auto& [x, y] : pts) svg << px(x) << "," << py(y) << " ";
      svg << "\"/>\n";
      for (const auto& [x, y] : pts)
        svg << "<circle cx=\"" << px(x) << "\" cy=\"" << py(y) << "\" r=\"2\" fill=\"#1f77b4\"/>\n";
    }
    svg << "</g>\n";
  }
  svg << "</svg>\n";
  return svg.str();
}

}  // namespace hessflow::io
