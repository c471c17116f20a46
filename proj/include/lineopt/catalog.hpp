#pragma once

// Problem instance: shift calendars, production rates, monthly targets,
// buffer capacities and the idle-time weight.

#include <array>
#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace lineopt {

inline constexpr int kSlotsPerDay = 48;
inline constexpr int kDaysPerWeek = 7;
inline constexpr int kSlotsPerWeek = kSlotsPerDay * kDaysPerWeek;
inline constexpr int kMonths = 12;
inline constexpr int kStages = 3;
inline constexpr int kShopsPerStage = 2;
inline constexpr int kShops = kStages * kShopsPerStage;
inline constexpr int kBuffers = kStages - 1;
inline constexpr double kStepHours = 0.5;

inline constexpr int kCatalogShiftCount = 15;
inline constexpr int kCatalogRateCount = 5;

/// Weekly working pattern of one shop; slot 0 is Monday 00:00-00:30.
struct ShiftSchedule {
  int id = 0;
  std::array<bool, kSlotsPerWeek> weekly_pattern{};

  int active_slots() const;
  double weekly_hours() const { return kStepHours * active_slots(); }

  friend bool operator==(const ShiftSchedule&, const ShiftSchedule&) = default;
};

struct RateOption {
  int id = 0;
  double cars_per_hour = 0.0;

  friend bool operator==(const RateOption&, const RateOption&) = default;
};

/// Month lengths plus the weekday (0 = Monday) the year starts on.
struct Calendar {
  int first_weekday = 0;
  std::array<int, kMonths> month_days{};

  int total_days() const;
  /// Day-of-year (0-based) on which `month` (1..12) starts.
  int month_start_day(int month) const;
  int weekday_of_day(int day) const { return (first_weekday + day) % kDaysPerWeek; }

  /// 2023: non-leap, January 1st is a Sunday.
  static Calendar year_2023();
  /// Twelve 28-day months starting on a Monday; every month is 4 whole weeks.
  static Calendar aligned_weeks();

  friend bool operator==(const Calendar&, const Calendar&) = default;
};

struct ProblemCatalog {
  std::vector<ShiftSchedule> shifts;
  std::vector<RateOption> rates;
  int nominal_rate_id = 1;
  std::array<double, kMonths> monthly_targets{};
  std::array<int, kBuffers> buffer_capacities{500, 700};
  double idle_weight = 1000.0;
  Calendar calendar = Calendar::year_2023();

  const ShiftSchedule& shift(int id) const { return shifts.at(static_cast<std::size_t>(id - 1)); }
  double rate(int id) const { return rates.at(static_cast<std::size_t>(id - 1)).cars_per_hour; }
  int shift_count() const { return static_cast<int>(shifts.size()); }
  int rate_count() const { return static_cast<int>(rates.size()); }
  double annual_target() const;

  friend bool operator==(const ProblemCatalog&, const ProblemCatalog&) = default;
};

/// Raised for malformed catalog text; message carries line and field context.
class CatalogParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Raised when a catalog violates a structural rule.
class CatalogValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class CatalogRules {
  strict,   // exactly 15 shifts and 5 rates
  relaxed,  // any non-zero counts; used for small test instances
};

void validate_catalog(const ProblemCatalog& catalog, CatalogRules rules = CatalogRules::strict);

ProblemCatalog default_catalog();

ProblemCatalog parse_catalog(std::string_view text, CatalogRules rules = CatalogRules::strict);
ProblemCatalog load_catalog(const std::filesystem::path& path,
                            CatalogRules rules = CatalogRules::strict);
/// Canonical text form; parse_catalog(dump_catalog(c)) == c.
std::string dump_catalog(const ProblemCatalog& catalog);

/// Hours of `shift` falling inside `month` (1..12) when the weekly pattern is
/// tiled across the catalog calendar.
double scheduled_hours(const ShiftSchedule& shift, int month, const ProblemCatalog& catalog);

/// Scheduled hours for every (shift, month), row = shift id - 1.
std::vector<std::array<double, kMonths>> scheduled_hours_table(const ProblemCatalog& catalog);

/// Builds a pattern from day mask (bit d = weekday d, Monday = bit 0) and
/// blocks given as [start, end) half-hour slots within a day; blocks may run
/// past midnight and wrap into the next day.
std::array<bool, kSlotsPerWeek> weekly_pattern_from_blocks(
    unsigned day_mask, const std::vector<std::pair<int, int>>& blocks);

}  // namespace lineopt
