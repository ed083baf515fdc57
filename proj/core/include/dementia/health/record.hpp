#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace dementia::health {

/// Raw physical measurements for one person.
struct HealthRecord {
  double age = 0.0;           // years
  double blood_oxygen = 0.0;  // percent SpO2
  double heart_rate = 0.0;    // beats per minute
  double body_temp = 0.0;     // degrees Celsius
  double weight = 0.0;        // kg
  int diabetic = 0;           // 0 or 1
  std::optional<int> dementia;

  bool operator==(const HealthRecord&) const = default;
};

inline constexpr std::size_t kFeatureCount = 6;
using FeatureVector = std::array<double, kFeatureCount>;

/// Class-coded record in the model's fixed feature order.
struct CategorizedFeatureVector {
  int diabetic = 0;
  int blood_oxygen = 0;
  int body_temp = 0;
  int heart_rate = 0;
  int weight = 0;
  int age = 0;

  /// [diabetic, blood_oxygen, body_temp, heart_rate, weight, age]
  FeatureVector values() const noexcept {
    return {static_cast<double>(diabetic), static_cast<double>(blood_oxygen), static_cast<double>(body_temp),
            static_cast<double>(heart_rate), static_cast<double>(weight),       static_cast<double>(age)};
  }

  bool operator==(const CategorizedFeatureVector&) const = default;
};

inline constexpr std::array<const char*, kFeatureCount> kFeatureNames = {
    "diabetic", "blood_oxygen", "body_temp", "heart_rate", "weight", "age"};

/// A field failed validation; `field()` names it using the CSV/JSON key.
class FieldError : public std::invalid_argument {
 public:
  FieldError(std::string field, const std::string& message)
      : std::invalid_argument(field + ": " + message), field_(std::move(field)) {}
  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

/// Maps raw measurements to classes 1..3 (diabetic stays 0/1). Boundary
/// values fall in the inclusive middle ranges. Ages outside [40, 90] have
/// no class and raise FieldError("age", ...).
CategorizedFeatureVector categorize(const HealthRecord& record);

/// Validates finiteness and the binary fields; throws FieldError.
void validate(const HealthRecord& record);

/// Header: age,blood_oxygen,heart_rate,body_temp,weight,diabetic,dementia
inline constexpr const char* kHealthCsvHeader = "age,blood_oxygen,heart_rate,body_temp,weight,diabetic,dementia";

/// Reads the CSV schema above. The dementia cell may be empty (unlabeled).
/// Throws std::runtime_error with the line number on malformed input.
std::vector<HealthRecord> read_health_csv(std::istream& in);
std::vector<HealthRecord> read_health_csv_file(const std::string& path);
void write_health_csv(std::ostream& out, const std::vector<HealthRecord>& records);

/// Desk-scale synthetic corpus. Labels follow a deterministic rule over the
/// categorized features, so the classes are separable after categorization:
/// risk = (age_class - 1) + 2 * diabetic + [oxygen class 1] + [heart class 3],
/// dementia = risk >= 3.
std::vector<HealthRecord> synthesize_health_records(std::size_t count, std::uint64_t seed);
int synthetic_label_rule(const CategorizedFeatureVector& features) noexcept;

}  // namespace dementia::health
