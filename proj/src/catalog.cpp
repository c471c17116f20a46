#include "lineopt/catalog.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <map>
#include <numeric>
#include <optional>
#include <set>
#include <sstream>

namespace lineopt {

int ShiftSchedule::active_slots() const {
  return static_cast<int>(std::count(weekly_pattern.begin(), weekly_pattern.end(), true));
}

int Calendar::total_days() const {
  return std::accumulate(month_days.begin(), month_days.end(), 0);
}

int Calendar::month_start_day(int month) const {
  return std::accumulate(month_days.begin(), month_days.begin() + (month - 1), 0);
}

Calendar Calendar::year_2023() {
  return Calendar{6, {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31}};
}

Calendar Calendar::aligned_weeks() {
  Calendar c;
  c.first_weekday = 0;
  c.month_days.fill(28);
  return c;
}

double ProblemCatalog::annual_target() const {
  return std::accumulate(monthly_targets.begin(), monthly_targets.end(), 0.0);
}

std::array<bool, kSlotsPerWeek> weekly_pattern_from_blocks(
    unsigned day_mask, const std::vector<std::pair<int, int>>& blocks) {
  std::array<bool, kSlotsPerWeek> pattern{};
  for (int day = 0; day < kDaysPerWeek; ++day) {
    if ((day_mask & (1u << day)) == 0) continue;
    for (auto [start, end] : blocks) {
      for (int slot = start; slot < end; ++slot) {
        pattern[static_cast<std::size_t>((day * kSlotsPerDay + slot) % kSlotsPerWeek)] = true;
      }
    }
  }
  return pattern;
}

ProblemCatalog default_catalog() {
  // Shift templates: {1,2,3 shifts/day} x {5,6 days/week} x {8h, 7h, 8.5h
  // blocks}. Three 8.5h blocks do not fit in a day, and the single 7h shift on
  // six days (42h) is dropped as it nearly duplicates 42.5h; the remaining 15
  // have distinct weekly totals. First block starts at 06:00.
  struct Template {
    int per_day;
    int days;
    int block_slots;
  };
  std::vector<Template> templates;
  for (int per_day : {1, 2, 3}) {
    for (int days : {5, 6}) {
      for (int block_slots : {16, 14, 17}) {
        if (per_day * block_slots > kSlotsPerDay) continue;
        if (per_day == 1 && days == 6 && block_slots == 14) continue;
        templates.push_back({per_day, days, block_slots});
      }
    }
  }
  std::stable_sort(templates.begin(), templates.end(), [](const Template& a, const Template& b) {
    return a.per_day * a.days * a.block_slots < b.per_day * b.days * b.block_slots;
  });

  ProblemCatalog catalog;
  for (std::size_t i = 0; i < templates.size(); ++i) {
    const auto& t = templates[i];
    const unsigned day_mask = (1u << t.days) - 1u;
    const int stride = std::max(t.block_slots, 16);
    std::vector<std::pair<int, int>> blocks;
    for (int k = 0; k < t.per_day; ++k) {
      const int start = 12 + k * stride;
      blocks.emplace_back(start, start + t.block_slots);
    }
    catalog.shifts.push_back({static_cast<int>(i + 1), weekly_pattern_from_blocks(day_mask, blocks)});
  }
  const double rates[] = {40.0, 45.0, 50.0, 55.0, 60.0};
  for (int i = 0; i < 5; ++i) catalog.rates.push_back({i + 1, rates[i]});
  catalog.nominal_rate_id = 3;
  catalog.monthly_targets.fill(30000.0);
  catalog.buffer_capacities = {500, 700};
  catalog.idle_weight = 1000.0;
  catalog.calendar = Calendar::year_2023();
  return catalog;
}

void validate_catalog(const ProblemCatalog& catalog, CatalogRules rules) {
  auto fail = [](const std::string& msg) { throw CatalogValidationError(msg); };
  if (rules == CatalogRules::strict) {
    if (catalog.shifts.size() != kCatalogShiftCount) fail("expected 15 shift schedules");
    if (catalog.rates.size() != kCatalogRateCount) fail("expected 5 rate options");
  } else {
    if (catalog.shifts.empty()) fail("expected at least one shift schedule");
    if (catalog.rates.empty()) fail("expected at least one rate option");
  }
  for (std::size_t i = 0; i < catalog.shifts.size(); ++i) {
    const auto& s = catalog.shifts[i];
    if (s.id != static_cast<int>(i + 1)) fail("shift ids must be 1..n in order");
    if (s.active_slots() == 0) fail("shift " + std::to_string(s.id) + " has no working slots");
  }
  for (std::size_t i = 0; i < catalog.rates.size(); ++i) {
    const auto& r = catalog.rates[i];
    if (r.id != static_cast<int>(i + 1)) fail("rate ids must be 1..n in order");
    if (!(r.cars_per_hour > 0.0)) fail("rate " + std::to_string(r.id) + " must be positive");
    if (i > 0 && !(r.cars_per_hour > catalog.rates[i - 1].cars_per_hour)) {
      fail("rates must be strictly increasing by id");
    }
  }
  if (catalog.nominal_rate_id < 1 || catalog.nominal_rate_id > catalog.rate_count()) {
    fail("nominal rate id out of range");
  }
  for (double t : catalog.monthly_targets) {
    if (!(t > 0.0)) fail("monthly targets must be positive");
  }
  for (int b : catalog.buffer_capacities) {
    if (b <= 0) fail("buffer capacities must be positive");
  }
  if (!(catalog.idle_weight > 0.0)) fail("idle weight must be positive");
  if (catalog.calendar.first_weekday < 0 || catalog.calendar.first_weekday > 6) {
    fail("calendar first_weekday must be 0..6");
  }
  for (int d : catalog.calendar.month_days) {
    if (d <= 0) fail("calendar month lengths must be positive");
  }
}

// ---------------------------------------------------------------------------
// Text format
// ---------------------------------------------------------------------------

namespace {

constexpr const char* kWeekdayNames[] = {"Mon", "Tue", "Wed", "Thu", "Fri", "Sat", "Sun"};

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t pos = 0;
  while (true) {
    auto next = s.find(sep, pos);
    out.push_back(trim(s.substr(pos, next - pos)));
    if (next == std::string_view::npos) break;
    pos = next + 1;
  }
  return out;
}

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

class Parser {
 public:
  explicit Parser(CatalogRules rules) : rules_(rules) {}

  ProblemCatalog parse(std::string_view text) {
    int line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
      auto next = text.find('\n', pos);
      auto raw = text.substr(pos, next == std::string_view::npos ? std::string_view::npos : next - pos);
      ++line_no;
      line_ = line_no;
      handle_line(raw);
      if (next == std::string_view::npos) break;
      pos = next + 1;
    }
    return finish();
  }

 private:
  [[noreturn]] void error(std::string_view field, const std::string& msg) const {
    throw CatalogParseError("line " + std::to_string(line_) + ": field '" + std::string(field) +
                            "': " + msg);
  }

  double parse_double(std::string_view field, std::string_view v) const {
    std::string s(v);
    char* end = nullptr;
    double out = std::strtod(s.c_str(), &end);
    if (s.empty() || end != s.c_str() + s.size()) error(field, "expected a number, got '" + s + "'");
    return out;
  }

  long parse_int(std::string_view field, std::string_view v) const {
    long out = 0;
    auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (v.empty() || ec != std::errc() || ptr != v.data() + v.size()) {
      error(field, "expected an integer, got '" + std::string(v) + "'");
    }
    return out;
  }

  void handle_line(std::string_view raw) {
    auto hash = raw.find('#');
    auto line = trim(raw.substr(0, hash));
    if (line.empty()) return;
    if (line.front() == '[') {
      if (line.back() != ']') error(line, "unterminated section header");
      section_ = std::string(trim(line.substr(1, line.size() - 2)));
      static const char* known[] = {"shifts", "rates", "targets", "buffers", "weight", "calendar"};
      if (std::find(std::begin(known), std::end(known), section_) == std::end(known)) {
        error(section_, "unknown section");
      }
      if (!seen_sections_.insert({section_, line_}).second) error(section_, "duplicate section");
      return;
    }
    auto eq = line.find('=');
    if (eq == std::string_view::npos) error(line, "expected 'key = value'");
    auto key = trim(line.substr(0, eq));
    auto value = trim(line.substr(eq + 1));
    if (section_.empty()) error(key, "entry outside of any section");
    std::string full_key = section_ + "." + std::string(key);
    if (!seen_keys_.insert(full_key).second) error(full_key, "duplicate entry");

    if (section_ == "shifts") {
      shifts_.emplace_back(parse_int(full_key, key), parse_shift(full_key, value));
    } else if (section_ == "rates") {
      if (key == "nominal") {
        nominal_ = static_cast<int>(parse_int(full_key, value));
      } else {
        rates_.emplace_back(parse_int(full_key, key), parse_double(full_key, value));
      }
    } else if (section_ == "targets") {
      if (key == "all") {
        double t = parse_double(full_key, value);
        for (auto& slot : targets_) slot = t;
      } else {
        long m = parse_int(full_key, key);
        if (m < 1 || m > kMonths) error(full_key, "month must be 1..12");
        targets_[static_cast<std::size_t>(m - 1)] = parse_double(full_key, value);
      }
    } else if (section_ == "buffers") {
      if (key == "body_paint") {
        buffers_[0] = static_cast<int>(parse_int(full_key, value));
      } else if (key == "paint_assembly") {
        buffers_[1] = static_cast<int>(parse_int(full_key, value));
      } else {
        error(full_key, "unknown buffer (body_paint, paint_assembly)");
      }
    } else if (section_ == "weight") {
      if (key != "idle") error(full_key, "unknown weight (idle)");
      weight_ = parse_double(full_key, value);
    } else if (section_ == "calendar") {
      if (key == "first_weekday") {
        first_weekday_ = static_cast<int>(parse_int(full_key, value));
      } else if (key == "months") {
        auto parts = split(value, ',');
        if (parts.size() != kMonths) error(full_key, "expected 12 month lengths");
        std::array<int, kMonths> days{};
        for (std::size_t i = 0; i < parts.size(); ++i) {
          days[i] = static_cast<int>(parse_int(full_key, parts[i]));
        }
        month_days_ = days;
      } else {
        error(full_key, "unknown calendar key (first_weekday, months)");
      }
    }
  }

  int parse_clock(std::string_view field, std::string_view hhmm) const {
    auto colon = hhmm.find(':');
    if (colon == std::string_view::npos) error(field, "expected HH:MM, got '" + std::string(hhmm) + "'");
    long h = parse_int(field, hhmm.substr(0, colon));
    long m = parse_int(field, hhmm.substr(colon + 1));
    if (h < 0 || h > 24 || (m != 0 && m != 30) || (h == 24 && m != 0)) {
      error(field, "times must be on the half hour within 00:00-24:00");
    }
    return static_cast<int>(h * 2 + m / 30);
  }

  int parse_weekday(std::string_view field, std::string_view name) const {
    for (int d = 0; d < kDaysPerWeek; ++d) {
      if (name == kWeekdayNames[d]) return d;
    }
    error(field, "unknown weekday '" + std::string(name) + "'");
  }

  // Either 336 characters of 0/1, or "days:Mon-Fri blocks:06:00-14:00,...".
  std::array<bool, kSlotsPerWeek> parse_shift(std::string_view field, std::string_view value) const {
    if (value.size() == kSlotsPerWeek && value.find_first_not_of("01") == std::string_view::npos) {
      std::array<bool, kSlotsPerWeek> pattern{};
      for (std::size_t i = 0; i < value.size(); ++i) pattern[i] = value[i] == '1';
      return pattern;
    }
    std::optional<unsigned> day_mask;
    std::optional<std::vector<std::pair<int, int>>> blocks;
    std::size_t pos = 0;
    while (pos < value.size()) {
      auto end = value.find_first_of(" \t", pos);
      auto token = value.substr(pos, end == std::string_view::npos ? std::string_view::npos : end - pos);
      pos = end == std::string_view::npos ? value.size() : end + 1;
      if (token.empty()) continue;
      if (token.starts_with("days:")) {
        unsigned mask = 0;
        for (auto part : split(token.substr(5), ',')) {
          auto dash = part.find('-');
          if (dash == std::string_view::npos) {
            mask |= 1u << parse_weekday(field, part);
          } else {
            int a = parse_weekday(field, part.substr(0, dash));
            int b = parse_weekday(field, part.substr(dash + 1));
            if (b < a) error(field, "weekday range must not wrap");
            for (int d = a; d <= b; ++d) mask |= 1u << d;
          }
        }
        day_mask = mask;
      } else if (token.starts_with("blocks:")) {
        std::vector<std::pair<int, int>> bs;
        for (auto part : split(token.substr(7), ',')) {
          auto dash = part.find('-');
          if (dash == std::string_view::npos) error(field, "block must be HH:MM-HH:MM");
          int a = parse_clock(field, part.substr(0, dash));
          int b = parse_clock(field, part.substr(dash + 1));
          if (b <= a) b += kSlotsPerDay;  // runs past midnight
          bs.emplace_back(a, b);
        }
        blocks = std::move(bs);
      } else {
        error(field, "expected a 336-character 0/1 pattern or 'days:... blocks:...' shorthand");
      }
    }
    if (!day_mask || !blocks) error(field, "shorthand needs both days: and blocks:");
    return weekly_pattern_from_blocks(*day_mask, *blocks);
  }

  ProblemCatalog finish() {
    line_ = 0;
    for (const char* required : {"shifts", "rates", "targets", "buffers", "weight", "calendar"}) {
      if (!seen_sections_.count(required)) {
        throw CatalogParseError(std::string("missing section [") + required + "]");
      }
    }
    ProblemCatalog c;
    std::sort(shifts_.begin(), shifts_.end(), [](auto& a, auto& b) { return a.first < b.first; });
    for (auto& [id, pattern] : shifts_) c.shifts.push_back({static_cast<int>(id), pattern});
    std::sort(rates_.begin(), rates_.end(), [](auto& a, auto& b) { return a.first < b.first; });
    for (auto& [id, r] : rates_) c.rates.push_back({static_cast<int>(id), r});
    if (!nominal_) throw CatalogParseError("missing field 'rates.nominal'");
    c.nominal_rate_id = *nominal_;
    for (std::size_t m = 0; m < targets_.size(); ++m) {
      if (!targets_[m]) throw CatalogParseError("missing field 'targets." + std::to_string(m + 1) + "'");
      c.monthly_targets[m] = *targets_[m];
    }
    if (!buffers_[0] || !buffers_[1]) throw CatalogParseError("missing buffer capacity");
    c.buffer_capacities = {*buffers_[0], *buffers_[1]};
    if (!weight_) throw CatalogParseError("missing field 'weight.idle'");
    c.idle_weight = *weight_;
    if (!first_weekday_ || !month_days_) throw CatalogParseError("incomplete [calendar] section");
    c.calendar = Calendar{*first_weekday_, *month_days_};
    validate_catalog(c, rules_);
    return c;
  }

  CatalogRules rules_;
  int line_ = 0;
  std::string section_;
  std::map<std::string, int> seen_sections_;
  std::set<std::string> seen_keys_;
  std::vector<std::pair<long, std::array<bool, kSlotsPerWeek>>> shifts_;
  std::vector<std::pair<long, double>> rates_;
  std::optional<int> nominal_;
  std::array<std::optional<double>, kMonths> targets_{};
  std::array<std::optional<int>, kBuffers> buffers_{};
  std::optional<double> weight_;
  std::optional<int> first_weekday_;
  std::optional<std::array<int, kMonths>> month_days_;
};

}  // namespace

ProblemCatalog parse_catalog(std::string_view text, CatalogRules rules) {
  return Parser(rules).parse(text);
}

ProblemCatalog load_catalog(const std::filesystem::path& path, CatalogRules rules) {
  std::ifstream in(path);
  if (!in) throw CatalogParseError("cannot read catalog file '" + path.string() + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_catalog(ss.str(), rules);
}

std::string dump_catalog(const ProblemCatalog& catalog) {
  std::ostringstream out;
  out << "# lineopt catalog\n[shifts]\n";
  for (const auto& s : catalog.shifts) {
    out << s.id << " = ";
    for (bool b : s.weekly_pattern) out << (b ? '1' : '0');
    out << "  # " << format_double(s.weekly_hours()) << " h/week\n";
  }
  out << "\n[rates]\n";
  for (const auto& r : catalog.rates) out << r.id << " = " << format_double(r.cars_per_hour) << "\n";
  out << "nominal = " << catalog.nominal_rate_id << "\n\n[targets]\n";
  for (int m = 0; m < kMonths; ++m) {
    out << m + 1 << " = " << format_double(catalog.monthly_targets[static_cast<std::size_t>(m)]) << "\n";
  }
  out << "\n[buffers]\nbody_paint = " << catalog.buffer_capacities[0]
      << "\npaint_assembly = " << catalog.buffer_capacities[1] << "\n\n[weight]\nidle = "
      << format_double(catalog.idle_weight) << "\n\n[calendar]\nfirst_weekday = "
      << catalog.calendar.first_weekday << "\nmonths = ";
  for (int m = 0; m < kMonths; ++m) {
    out << (m ? "," : "") << catalog.calendar.month_days[static_cast<std::size_t>(m)];
  }
  out << "\n";
  return out.str();
}

double scheduled_hours(const ShiftSchedule& shift, int month, const ProblemCatalog& catalog) {
  const auto& cal = catalog.calendar;
  const int first_day = cal.month_start_day(month);
  const int days = cal.month_days[static_cast<std::size_t>(month - 1)];
  int active = 0;
  for (int d = first_day; d < first_day + days; ++d) {
    const int base = cal.weekday_of_day(d) * kSlotsPerDay;
    for (int s = 0; s < kSlotsPerDay; ++s) {
      active += shift.weekly_pattern[static_cast<std::size_t>(base + s)] ? 1 : 0;
    }
  }
  return kStepHours * active;
}

std::vector<std::array<double, kMonths>> scheduled_hours_table(const ProblemCatalog& catalog) {
  std::vector<std::array<double, kMonths>> table(catalog.shifts.size());
  for (std::size_t i = 0; i < catalog.shifts.size(); ++i) {
    for (int m = 1; m <= kMonths; ++m) {
      table[i][static_cast<std::size_t>(m - 1)] = scheduled_hours(catalog.shifts[i], m, catalog);
    }
  }
  return table;
}

}  // namespace lineopt
