#include "dementia/health/record.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "dementia/nn/rng.hpp"

namespace dementia::health {
namespace {

// Three-way split with an inclusive middle band [lo, hi].
int three_band(double value, double lo, double hi) noexcept {
  if (value < lo) return 1;
  if (value <= hi) return 2;
  return 3;
}

void require_finite(double v, const char* field) {
  if (!std::isfinite(v)) throw FieldError(field, "must be a finite number");
}

}  // namespace

void validate(const HealthRecord& r) {
  require_finite(r.age, "age");
  require_finite(r.blood_oxygen, "blood_oxygen");
  require_finite(r.heart_rate, "heart_rate");
  require_finite(r.body_temp, "body_temp");
  require_finite(r.weight, "weight");
  if (r.diabetic != 0 && r.diabetic != 1) throw FieldError("diabetic", "must be 0 or 1");
  if (r.dementia && *r.dementia != 0 && *r.dementia != 1) throw FieldError("dementia", "must be 0 or 1");
}

CategorizedFeatureVector categorize(const HealthRecord& r) {
  validate(r);
  if (r.age < 40.0 || r.age > 90.0) throw FieldError("age", "must be within 40-90 years");
  CategorizedFeatureVector c;
  c.diabetic = r.diabetic;
  c.blood_oxygen = three_band(r.blood_oxygen, 95.0, 100.0);
  c.body_temp = three_band(r.body_temp, 36.5, 37.5);
  c.heart_rate = three_band(r.heart_rate, 60.0, 100.0);
  c.weight = three_band(r.weight, 50.0, 70.0);
  c.age = r.age < 65.0 ? 1 : (r.age < 75.0 ? 2 : 3);
  return c;
}

namespace {

std::vector<std::string> split_cells(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, ',')) cells.push_back(cell);
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

std::string trim(std::string s) {
  const auto first = s.find_first_not_of(" \t\r");
  const auto last = s.find_last_not_of(" \t\r");
  return first == std::string::npos ? std::string{} : s.substr(first, last - first + 1);
}

double parse_number(const std::string& cell, const char* field, std::size_t line) {
  try {
    std::size_t used = 0;
    const double v = std::stod(cell, &used);
    if (used != cell.size()) throw std::invalid_argument(cell);
    return v;
  } catch (const std::exception&) {
    throw std::runtime_error("line " + std::to_string(line) + ": field '" + field + "' is not a number: '" + cell + "'");
  }
}

int parse_flag(const std::string& cell, const char* field, std::size_t line) {
  const double v = parse_number(cell, field, line);
  if (v != 0.0 && v != 1.0) {
    throw std::runtime_error("line " + std::to_string(line) + ": field '" + field + "' must be 0 or 1");
  }
  return static_cast<int>(v);
}

}  // namespace

std::vector<HealthRecord> read_health_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("health csv: missing header");
  if (line.size() >= 3 && static_cast<unsigned char>(line[0]) == 0xEF) line.erase(0, 3);  // UTF-8 BOM
  if (trim(line) != kHealthCsvHeader) {
    throw std::runtime_error(std::string("health csv: header must be '") + kHealthCsvHeader + "'");
  }
  std::vector<HealthRecord> records;
  std::size_t number = 1;
  while (std::getline(in, line)) {
    ++number;
    if (trim(line).empty()) continue;
    auto cells = split_cells(line);
    for (auto& c : cells) c = trim(c);
    if (cells.size() != 7) {
      throw std::runtime_error("line " + std::to_string(number) + ": expected 7 fields, got " +
                               std::to_string(cells.size()));
    }
    HealthRecord r;
    r.age = parse_number(cells[0], "age", number);
    r.blood_oxygen = parse_number(cells[1], "blood_oxygen", number);
    r.heart_rate = parse_number(cells[2], "heart_rate", number);
    r.body_temp = parse_number(cells[3], "body_temp", number);
    r.weight = parse_number(cells[4], "weight", number);
    r.diabetic = parse_flag(cells[5], "diabetic", number);
    if (!cells[6].empty()) r.dementia = parse_flag(cells[6], "dementia", number);
    try {
      validate(r);
    } catch (const FieldError& e) {
      throw std::runtime_error("line " + std::to_string(number) + ": " + e.what());
    }
    records.push_back(r);
  }
  return records;
}

std::vector<HealthRecord> read_health_csv_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  return read_health_csv(in);
}

void write_health_csv(std::ostream& out, const std::vector<HealthRecord>& records) {
  // Shortest text that parses back to the same double.
  const auto num = [&out](double v) {
    char buf[32];
    const auto end = std::to_chars(buf, buf + sizeof buf, v).ptr;
    out.write(buf, end - buf);
    out << ',';
  };
  out << kHealthCsvHeader << '\n';
  for (const auto& r : records) {
    num(r.age);
    num(r.blood_oxygen);
    num(r.heart_rate);
    num(r.body_temp);
    num(r.weight);
    out << r.diabetic << ',';
    if (r.dementia) out << *r.dementia;
    out << '\n';
  }
}

int synthetic_label_rule(const CategorizedFeatureVector& c) noexcept {
  const int risk = (c.age - 1) + 2 * c.diabetic + (c.blood_oxygen == 1 ? 1 : 0) + (c.heart_rate == 3 ? 1 : 0);
  return risk >= 3 ? 1 : 0;
}

std::vector<HealthRecord> synthesize_health_records(std::size_t count, std::uint64_t seed) {
  nn::Rng rng(seed);
  // Rounded to one decimal so the CSV text is short and exact.
  const auto draw = [&](double lo, double hi) { return std::round(rng.uniform(lo, hi) * 10.0) / 10.0; };
  std::vector<HealthRecord> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    HealthRecord r;
    r.age = draw(40.0, 90.0);
    r.blood_oxygen = draw(89.0, 100.0);
    r.heart_rate = draw(45.0, 120.0);
    r.body_temp = draw(35.8, 38.2);
    r.weight = draw(40.0, 95.0);
    r.diabetic = rng.uniform() < 0.25 ? 1 : 0;
    r.dementia = synthetic_label_rule(categorize(r));
    out.push_back(r);
  }
  return out;
}

}  // namespace dementia::health
