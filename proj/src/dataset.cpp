#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "sfcdelay/netsim.hpp"

namespace sfcdelay::netsim {

namespace {

std::string fmt_double(double v) {
  char buf[32];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, end);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream is(s);
  while (std::getline(is, cur, sep)) out.push_back(cur);
  if (!s.empty() && s.back() == sep) out.emplace_back();
  return out;
}

template <typename T>
T parse_number(const std::string& field, std::size_t line, const char* column) {
  T v{};
  auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
  if (ec != std::errc() || ptr != field.data() + field.size()) {
    throw std::runtime_error("dataset line " + std::to_string(line) + ": bad " + column +
                             " value '" + field + "'");
  }
  return v;
}

}  // namespace

std::string dataset_header(std::size_t stage_count) {
  std::string h = "id,arrival_time";
  for (std::size_t n = 1; n <= stage_count; ++n) h += ",b_" + std::to_string(n);
  h += ",path_id,delay,path,sojourns";
  return h;
}

std::string dataset_row(const CustomerRecord& r) {
  std::string row = std::to_string(r.id) + "," + fmt_double(r.arrival_time);
  for (int v : r.b) row += "," + std::to_string(v);
  row += "," + std::to_string(r.path_id) + "," + fmt_double(r.delay) + ",";
  for (std::size_t i = 0; i < r.path.size(); ++i) {
    row += (i ? "-" : "") + std::to_string(r.path[i]);
  }
  row += ",";
  for (std::size_t i = 0; i < r.stage_sojourns.size(); ++i) {
    row += (i ? ";" : "") + fmt_double(r.stage_sojourns[i]);
  }
  return row;
}

void write_dataset(std::span<const CustomerRecord> records, std::size_t stage_count,
                   const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write dataset " + path.string());
  out << dataset_header(stage_count) << '\n';
  for (const auto& r : records) {
    if (r.b.size() != stage_count) {
      throw std::invalid_argument("write_dataset: record " + std::to_string(r.id) + " has " +
                                  std::to_string(r.b.size()) + " queue lengths, expected " +
                                  std::to_string(stage_count));
    }
    out << dataset_row(r) << '\n';
  }
  if (!out) throw std::runtime_error("write failed for dataset " + path.string());
}

std::vector<CustomerRecord> read_dataset(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read dataset " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("dataset line 1: missing header");
  const auto header = split(line, ',');
  std::size_t stages = 0;
  while (2 + stages < header.size() && header[2 + stages].rfind("b_", 0) == 0) ++stages;
  if (line != dataset_header(stages)) {
    throw std::runtime_error("dataset line 1: unexpected header '" + line + "'");
  }
  const std::size_t columns = header.size();

  std::vector<CustomerRecord> records;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto f = split(line, ',');
    if (f.size() != columns) {
      throw std::runtime_error("dataset line " + std::to_string(lineno) + ": expected " +
                               std::to_string(columns) + " fields, found " +
                               std::to_string(f.size()));
    }
    CustomerRecord r;
    r.id = parse_number<std::uint64_t>(f[0], lineno, "id");
    r.arrival_time = parse_number<double>(f[1], lineno, "arrival_time");
    for (std::size_t n = 0; n < stages; ++n) {
      const int v = parse_number<int>(f[2 + n], lineno, "b");
      if (v < 0) {
        throw std::runtime_error("dataset line " + std::to_string(lineno) +
                                 ": negative queue length");
      }
      r.b.push_back(v);
    }
    r.path_id = parse_number<int>(f[2 + stages], lineno, "path_id");
    r.delay = parse_number<double>(f[3 + stages], lineno, "delay");
    if (!(r.delay > 0.0) || !std::isfinite(r.delay)) {
      throw std::runtime_error("dataset line " + std::to_string(lineno) +
                               ": delay must be positive, got " + f[3 + stages]);
    }
    if (!f[4 + stages].empty()) {
      for (const auto& s : split(f[4 + stages], '-')) r.path.push_back(parse_number<int>(s, lineno, "path"));
    }
    if (!f[5 + stages].empty()) {
      double total = 0.0;
      for (const auto& s : split(f[5 + stages], ';')) {
        r.stage_sojourns.push_back(parse_number<double>(s, lineno, "sojourns"));
        total += r.stage_sojourns.back();
      }
      if (std::abs(total - r.delay) > 1e-9 * std::max(1.0, r.delay)) {
        throw std::runtime_error("dataset line " + std::to_string(lineno) +
                                 ": delay does not equal the sum of stage sojourns");
      }
    }
    records.push_back(std::move(r));
  }
  return records;
}

}  // namespace sfcdelay::netsim
