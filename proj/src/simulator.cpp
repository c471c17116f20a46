#include "lineopt/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <vector>

namespace lineopt {

std::array<int, 2 * kShops> LineConfig::to_12body() const {
  std::array<int, 2 * kShops> out{};
  for (int j = 0; j < kShops; ++j) {
    out[static_cast<std::size_t>(2 * j)] = shops[static_cast<std::size_t>(j)].shift_id;
    out[static_cast<std::size_t>(2 * j + 1)] = shops[static_cast<std::size_t>(j)].rate_id;
  }
  return out;
}

LineConfig LineConfig::from_12body(const std::array<int, 2 * kShops>& values) {
  LineConfig c;
  for (int j = 0; j < kShops; ++j) {
    c.shops[static_cast<std::size_t>(j)] = {values[static_cast<std::size_t>(2 * j)],
                                            values[static_cast<std::size_t>(2 * j + 1)]};
  }
  return c;
}

bool LineConfig::valid_for(const ProblemCatalog& catalog) const {
  return std::all_of(shops.begin(), shops.end(), [&](const ShopState& s) {
    return s.shift_id >= 1 && s.shift_id <= catalog.shift_count() && s.rate_id >= 1 &&
           s.rate_id <= catalog.rate_count();
  });
}

std::string LineConfig::to_string() const {
  std::ostringstream out;
  auto v = to_12body();
  for (std::size_t i = 0; i < v.size(); ++i) out << (i ? "," : "") << v[i];
  return out.str();
}

LineConfig LineConfig::parse(std::string_view text) {
  std::array<int, 2 * kShops> values{};
  std::size_t count = 0;
  std::string token;
  std::istringstream in{std::string(text)};
  while (std::getline(in, token, ',')) {
    if (count == values.size()) throw std::invalid_argument("config has more than 12 values");
    std::size_t used = 0;
    int v = 0;
    try {
      v = std::stoi(token, &used);
    } catch (const std::exception&) {
      throw std::invalid_argument("config value '" + token + "' is not an integer");
    }
    if (used != token.size()) throw std::invalid_argument("config value '" + token + "' is not an integer");
    values[count++] = v;
  }
  if (count != values.size()) throw std::invalid_argument("config needs 12 comma-separated values");
  return from_12body(values);
}

std::int64_t SimResult::annual_production() const {
  return std::accumulate(monthly_production.begin(), monthly_production.end(), std::int64_t{0});
}

double SimResult::total_idle_hours() const {
  double total = 0.0;
  for (const auto& shop : idle_hours) {
    for (double h : shop) total += h;
  }
  return total;
}

namespace {

struct Shop {
  const std::array<bool, kSlotsPerWeek>* pattern = nullptr;
  double work_per_step = 0.0;
  double carry = 0.0;
};

}  // namespace

SimResult simulate(const ProblemCatalog& catalog, const LineConfig& config,
                   const StepObserver& observer) {
  if (!config.valid_for(catalog)) throw std::invalid_argument("config not valid for catalog");
  constexpr std::int64_t kUnbounded = std::numeric_limits<std::int64_t>::max();

  std::array<Shop, kShops> shops;
  for (int j = 0; j < kShops; ++j) {
    const auto& state = config.shops[static_cast<std::size_t>(j)];
    shops[static_cast<std::size_t>(j)] = {&catalog.shift(state.shift_id).weekly_pattern,
                                          catalog.rate(state.rate_id) * kStepHours, 0.0};
  }

  SimResult result;
  std::array<std::int64_t, kBuffers> buffers{};
  const auto& cal = catalog.calendar;
  StepRecord record;
  int step = 0;

  for (int month = 0; month < kMonths; ++month) {
    const int first_day = cal.month_start_day(month + 1);
    const int days = cal.month_days[static_cast<std::size_t>(month)];
    for (int day = first_day; day < first_day + days; ++day) {
      const int week_base = cal.weekday_of_day(day) * kSlotsPerDay;
      for (int slot = 0; slot < kSlotsPerDay; ++slot, ++step) {
        const auto w = static_cast<std::size_t>(week_base + slot);
        if (observer) {
          record.produced.fill(0);
          record.idle.fill(false);
        }
        // Downstream first: assembly, then paint, then body.
        for (int stage = kStages - 1; stage >= 0; --stage) {
          for (int k = 0; k < kShopsPerStage; ++k) {
            const int j = stage * kShopsPerStage + k;
            Shop& shop = shops[static_cast<std::size_t>(j)];
            if (!(*shop.pattern)[w]) continue;

            const double capacity = shop.carry + shop.work_per_step;
            const auto desired = static_cast<std::int64_t>(std::floor(capacity));
            const std::int64_t available =
                stage == 0 ? kUnbounded : buffers[static_cast<std::size_t>(stage - 1)];
            const std::int64_t room =
                stage == kStages - 1
                    ? kUnbounded
                    : catalog.buffer_capacities[static_cast<std::size_t>(stage)] -
                          buffers[static_cast<std::size_t>(stage)];
            const std::int64_t produced = std::min({desired, available, room});

            if (produced == desired) {
              shop.carry = capacity - static_cast<double>(desired);
            } else {
              const double fraction = static_cast<double>(produced) / static_cast<double>(desired);
              result.idle_hours[static_cast<std::size_t>(j)][static_cast<std::size_t>(month)] +=
                  kStepHours * (1.0 - fraction);
              if (observer) record.idle[static_cast<std::size_t>(j)] = true;
            }
            if (stage > 0) buffers[static_cast<std::size_t>(stage - 1)] -= produced;
            if (stage < kStages - 1) {
              buffers[static_cast<std::size_t>(stage)] += produced;
            } else {
              result.monthly_production[static_cast<std::size_t>(month)] += produced;
            }
            result.shop_output[static_cast<std::size_t>(j)] += produced;
            if (observer) record.produced[static_cast<std::size_t>(j)] = produced;
          }
        }
        for (int b = 0; b < kBuffers; ++b) {
          const auto level = buffers[static_cast<std::size_t>(b)];
          if (level < 0 || level > catalog.buffer_capacities[static_cast<std::size_t>(b)]) {
            throw std::logic_error("buffer bound violated during simulation");
          }
        }
        if (observer) {
          record.step = step;
          record.day = day;
          record.slot = slot;
          record.buffers = buffers;
          observer(record);
        }
      }
    }
  }
  result.final_buffers = buffers;
  return result;
}

CostValue cost(const SimResult& result, const ProblemCatalog& catalog) {
  CostValue c;
  for (int m = 0; m < kMonths; ++m) {
    c.production_term += std::abs(catalog.monthly_targets[static_cast<std::size_t>(m)] -
                                  static_cast<double>(result.monthly_production[static_cast<std::size_t>(m)]));
  }
  double idle = 0.0;
  for (int m = 0; m < kMonths; ++m) {
    for (int j = 0; j < kShops; ++j) {
      idle += result.idle_hours[static_cast<std::size_t>(j)][static_cast<std::size_t>(m)];
    }
  }
  c.idle_term = catalog.idle_weight * idle;
  c.total = c.production_term + c.idle_term;
  return c;
}

CostValue evaluate(const ProblemCatalog& catalog, const LineConfig& config) {
  return cost(simulate(catalog, config), catalog);
}

}  // namespace lineopt
