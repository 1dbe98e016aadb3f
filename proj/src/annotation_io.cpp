#include <charconv>
#include <fstream>
#include <sstream>
#include <string>

#include "regmark/annotation.hpp"

namespace regmark {
namespace {

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

double parse_double(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\r' || s.back() == '\t')) s.remove_suffix(1);
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
    throw ValidationError("invalid_csv", "cannot parse number '" + std::string(s) + "'");
  }
  return v;
}

std::vector<std::string_view> split(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    out.push_back(line.substr(start, comma - start));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

int dimension_from_columns(std::size_t columns) {
  // 2d + d(d+1)/2 columns
  if (columns == 7) return 2;
  if (columns == 12) return 3;
  throw ValidationError("invalid_csv", "annotation CSV must have 7 (2-D) or 12 (3-D) columns");
}

bool ends_with(const std::string& s, const std::string& suffix) {
  return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

}  // namespace

void write_annotations_csv(std::ostream& os, std::span<const Annotation> annotations) {
  const int d = annotations.empty() ? 2 : annotations.front().dimension();
  for (int i = 0; i < d; ++i) os << "x" << i << ',';
  for (int i = 0; i < d; ++i) os << "y" << i << ',';
  for (int r = 0; r < d; ++r) {
    for (int c = r; c < d; ++c) {
      os << 's' << r << c << (r == d - 1 && c == d - 1 ? "\n" : ",");
    }
  }
  for (const auto& a : annotations) {
    if (a.dimension() != d) throw DimensionError("write_annotations_csv: mixed dimensions");
    std::string row;
    for (int i = 0; i < d; ++i) row += format_double(a.x(i)) + ',';
    for (int i = 0; i < d; ++i) row += format_double(a.y(i)) + ',';
    for (int r = 0; r < d; ++r) {
      for (int c = r; c < d; ++c) row += format_double(a.sigma(r, c)) + ',';
    }
    row.back() = '\n';
    os << row;
  }
}

std::vector<Annotation> read_annotations_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) throw ValidationError("invalid_csv", "annotation CSV is empty");
  const int d = dimension_from_columns(split(line).size());
  std::vector<Annotation> out;
  while (std::getline(is, line)) {
    if (line.empty() || line == "\r") continue;
    const auto cells = split(line);
    if (static_cast<int>(cells.size()) != 2 * d + d * (d + 1) / 2) {
      throw ValidationError("invalid_csv", "annotation CSV row has the wrong number of columns");
    }
    Annotation a;
    a.x.resize(d);
    a.y.resize(d);
    a.sigma.resize(d, d);
    std::size_t k = 0;
    for (int i = 0; i < d; ++i) a.x(i) = parse_double(cells[k++]);
    for (int i = 0; i < d; ++i) a.y(i) = parse_double(cells[k++]);
    for (int r = 0; r < d; ++r) {
      for (int c = r; c < d; ++c) {
        a.sigma(r, c) = parse_double(cells[k++]);
        a.sigma(c, r) = a.sigma(r, c);
      }
    }
    a.validate();
    out.push_back(std::move(a));
  }
  return out;
}

void to_json(nlohmann::json& j, const Annotation& a) {
  const int d = a.dimension();
  std::vector<std::vector<double>> sigma(d, std::vector<double>(d));
  for (int r = 0; r < d; ++r) {
    for (int c = 0; c < d; ++c) sigma[r][c] = a.sigma(r, c);
  }
  j = nlohmann::json{{"x", std::vector<double>(a.x.data(), a.x.data() + d)},
                     {"y", std::vector<double>(a.y.data(), a.y.data() + d)},
                     {"sigma", sigma}};
}

void from_json(const nlohmann::json& j, Annotation& a) {
  try {
    const auto x = j.at("x").get<std::vector<double>>();
    const auto y = j.at("y").get<std::vector<double>>();
    const auto sigma = j.at("sigma").get<std::vector<std::vector<double>>>();
    const auto d = static_cast<Eigen::Index>(x.size());
    a.x = Eigen::Map<const Vec>(x.data(), d);
    a.y = Eigen::Map<const Vec>(y.data(), static_cast<Eigen::Index>(y.size()));
    a.sigma.resize(static_cast<Eigen::Index>(sigma.size()), d);
    for (std::size_t r = 0; r < sigma.size(); ++r) {
      if (static_cast<Eigen::Index>(sigma[r].size()) != d) {
        throw ValidationError("invalid_annotation", "sigma rows must have d entries");
      }
      for (Eigen::Index c = 0; c < d; ++c) a.sigma(static_cast<Eigen::Index>(r), c) = sigma[r][c];
    }
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError("invalid_annotation", std::string("annotation JSON: ") + e.what());
  }
  a.validate();
}

std::vector<Annotation> load_annotations(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("io_error", "cannot open " + path);
  if (ends_with(path, ".json")) {
    nlohmann::json j;
    try {
      in >> j;
    } catch (const nlohmann::json::exception& e) {
      throw ValidationError("invalid_json", e.what());
    }
    return j.get<std::vector<Annotation>>();
  }
  return read_annotations_csv(in);
}

void save_annotations(const std::string& path, std::span<const Annotation> annotations) {
  std::ofstream out(path);
  if (!out) throw ValidationError("io_error", "cannot write " + path);
  if (ends_with(path, ".json")) {
    out << nlohmann::json(std::vector<Annotation>(annotations.begin(), annotations.end())).dump(2)
        << '\n';
  } else {
    write_annotations_csv(out, annotations);
  }
}

}  // namespace regmark
