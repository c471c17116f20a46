#pragma once

// Bijections between genomes and fixed-length bitstrings. Bits are written
// most significant first everywhere.

#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "lineopt/space.hpp"

namespace lineopt {

using BitString = std::vector<std::uint8_t>;

std::string to_string(const BitString& bits);
/// Throws std::invalid_argument on characters other than '0'/'1'.
BitString bits_from_string(std::string_view text);

/// Reflected binary Gray code.
constexpr std::uint64_t gray(std::uint64_t n) { return n ^ (n >> 1); }

constexpr std::uint64_t gray_inverse(std::uint64_t g) {
  std::uint64_t n = g;
  for (unsigned shift = 1; shift < 64; shift <<= 1) n ^= n >> shift;
  return n;
}

/// ceil(log2(count)); 0 when count <= 1.
unsigned field_width(std::uint64_t count);

enum class Scheme { basic, gray, pggray, twelvebody_gray };

std::string_view to_string(Scheme scheme);
Scheme parse_scheme(std::string_view text);

class Encoding {
 public:
  virtual ~Encoding() = default;

  virtual Scheme scheme() const = 0;
  virtual std::size_t length() const = 0;
  /// Throws std::out_of_range when the genome is not in the space.
  virtual BitString encode(const Genome& genome) const = 0;
  /// nullopt is the invalid-state signal; never throws for a correct length.
  virtual std::optional<Genome> decode(const BitString& bits) const = 0;
};

/// Whole genome as one mixed-radix number.
class BasicEncoding final : public Encoding {
 public:
  explicit BasicEncoding(const SearchSpace& space);

  Scheme scheme() const override { return Scheme::basic; }
  std::size_t length() const override { return width_; }
  BitString encode(const Genome& genome) const override;
  std::optional<Genome> decode(const BitString& bits) const override;

 private:
  const SearchSpace* space_;
  unsigned width_;
};

/// Each gene Gray-coded in its own field, fields concatenated.
class GrayEncoding final : public Encoding {
 public:
  explicit GrayEncoding(const SearchSpace& space);

  Scheme scheme() const override { return Scheme::gray; }
  std::size_t length() const override { return length_; }
  BitString encode(const Genome& genome) const override;
  std::optional<Genome> decode(const BitString& bits) const override;

 private:
  std::vector<std::uint32_t> sizes_;
  std::vector<unsigned> widths_;
  std::size_t length_ = 0;
};

/// Position <-> production-guided rank for one stage list under one ordering.
struct PgOrder {
  std::vector<std::uint32_t> position_at_rank;
  std::vector<std::uint32_t> rank_of_position;
};

/// Production-guided orderings of a 3-body space. Stage 1 is ranked by
/// closeness to the annual target; stages 2 and 3 by closeness to the chosen
/// stage-1 state's estimate (or, with `chain`, stage 3 to the stage-2 state).
/// Conditional orders are built on first use and memoized per key value.
class PgTables {
 public:
  PgTables(const ReducedSpace& space, bool chain);

  const PgOrder& stage1() const { return stage1_; }
  /// Order of `stage` (2 or 3) given the estimate it is keyed to.
  const PgOrder& conditional(int stage, double center) const;
  bool chained() const { return chain_; }

 private:
  const ReducedSpace* space_;
  bool chain_;
  PgOrder stage1_;
  mutable std::mutex mutex_;
  mutable std::array<std::map<double, std::unique_ptr<PgOrder>>, 2> memo_;
};

/// Production-guided reordering followed by per-field Gray coding.
class PgGrayEncoding final : public Encoding {
 public:
  explicit PgGrayEncoding(const ThreeBodySpace& space, bool chain = false);

  Scheme scheme() const override { return Scheme::pggray; }
  std::size_t length() const override { return length_; }
  BitString encode(const Genome& genome) const override;
  std::optional<Genome> decode(const BitString& bits) const override;

  /// Genome -> production-guided ranks and back (no Gray step).
  Genome ranks_of(const Genome& genome) const;
  Genome genome_of_ranks(const Genome& ranks) const;

  const PgTables& tables() const { return tables_; }

 private:
  const ThreeBodySpace* space_;
  PgTables tables_;
  std::array<unsigned, kStages> widths_{};
  std::size_t length_ = 0;
};

/// 12-body view: six Gray-coded shift fields followed by six Gray-coded rate
/// fields (4 and 3 bits on the default catalog, 42 bits in total).
class TwelveBodyGrayEncoding final : public Encoding {
 public:
  explicit TwelveBodyGrayEncoding(const TwelveBodySpace& space);

  Scheme scheme() const override { return Scheme::twelvebody_gray; }
  std::size_t length() const override { return length_; }
  BitString encode(const Genome& genome) const override;
  std::optional<Genome> decode(const BitString& bits) const override;

  BitString encode_config(const LineConfig& config) const;
  std::optional<LineConfig> decode_config(const BitString& bits) const;

 private:
  const TwelveBodySpace* space_;
  unsigned shift_width_;
  unsigned rate_width_;
  std::size_t length_;
};

struct EncodingOptions {
  bool pg_chain = false;
};

/// The space must outlive the returned encoding. pggray needs a ThreeBodySpace
/// and twelvebody_gray a TwelveBodySpace.
std::unique_ptr<Encoding> make_encoding(Scheme scheme, const SearchSpace& space,
                                        EncodingOptions options = {});

}  // namespace lineopt
