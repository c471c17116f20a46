#pragma once

// Half-hour time-domain simulation of the 3-stage, 6-shop line and the
// weighted cost function.

#include <array>
#include <cstdint>
#include <functional>
#include <string>
#include <string_view>

#include "lineopt/catalog.hpp"

namespace lineopt {

struct ShopState {
  int shift_id = 1;
  int rate_id = 1;

  friend auto operator<=>(const ShopState&, const ShopState&) = default;
};

/// Shops ordered body1, body2, paint1, paint2, asm1, asm2.
struct LineConfig {
  std::array<ShopState, kShops> shops{};

  /// (shift1, rate1, ..., shift6, rate6)
  std::array<int, 2 * kShops> to_12body() const;
  static LineConfig from_12body(const std::array<int, 2 * kShops>& values);

  bool valid_for(const ProblemCatalog& catalog) const;
  /// "s1,r1,...,s6,r6"
  std::string to_string() const;
  static LineConfig parse(std::string_view text);

  friend auto operator<=>(const LineConfig&, const LineConfig&) = default;
};

struct SimResult {
  std::array<std::int64_t, kMonths> monthly_production{};
  /// idle_hours[shop][month]
  std::array<std::array<double, kMonths>, kShops> idle_hours{};
  std::array<std::int64_t, kBuffers> final_buffers{};
  /// Whole units each shop completed over the year.
  std::array<std::int64_t, kShops> shop_output{};

  std::int64_t annual_production() const;
  double total_idle_hours() const;

  friend bool operator==(const SimResult&, const SimResult&) = default;
};

struct CostValue {
  double total = 0.0;
  double production_term = 0.0;
  double idle_term = 0.0;
};

/// One simulation step, reported to an optional observer.
struct StepRecord {
  int step = 0;
  int day = 0;
  int slot = 0;  // half-hour slot within the day
  std::array<std::int64_t, kShops> produced{};
  std::array<bool, kShops> idle{};
  std::array<std::int64_t, kBuffers> buffers{};
};

using StepObserver = std::function<void(const StepRecord&)>;

SimResult simulate(const ProblemCatalog& catalog, const LineConfig& config,
                   const StepObserver& observer = {});

CostValue cost(const SimResult& result, const ProblemCatalog& catalog);

/// simulate followed by cost; the unit counted against evaluation budgets.
CostValue evaluate(const ProblemCatalog& catalog, const LineConfig& config);

}  // namespace lineopt
