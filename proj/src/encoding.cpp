#include "lineopt/encoding.hpp"

#include <stdexcept>

namespace lineopt {

std::string to_string(const BitString& bits) {
  std::string s(bits.size(), '0');
  for (std::size_t i = 0; i < bits.size(); ++i) s[i] = bits[i] ? '1' : '0';
  return s;
}

BitString bits_from_string(std::string_view text) {
  BitString bits(text.size());
  for (std::size_t i = 0; i < text.size(); ++i) {
    if (text[i] != '0' && text[i] != '1') throw std::invalid_argument("bitstring must contain only 0 and 1");
    bits[i] = text[i] == '1';
  }
  return bits;
}

unsigned field_width(std::uint64_t count) {
  unsigned w = 0;
  while (w < 64 && (std::uint64_t{1} << w) < count) ++w;
  return w;
}

std::string_view to_string(Scheme scheme) {
  switch (scheme) {
    case Scheme::basic: return "basic";
    case Scheme::gray: return "gray";
    case Scheme::pggray: return "pggray";
    case Scheme::twelvebody_gray: return "twelvebody-gray";
  }
  return "?";
}

Scheme parse_scheme(std::string_view text) {
  if (text == "basic") return Scheme::basic;
  if (text == "gray") return Scheme::gray;
  if (text == "pggray") return Scheme::pggray;
  if (text == "twelvebody-gray" || text == "12body") return Scheme::twelvebody_gray;
  throw std::invalid_argument("unknown encoding scheme '" + std::string(text) + "'");
}

namespace {

void write_field(BitString& bits, std::size_t offset, unsigned width, std::uint64_t value) {
  for (unsigned b = 0; b < width; ++b) {
    bits[offset + b] = static_cast<std::uint8_t>((value >> (width - 1 - b)) & 1u);
  }
}

std::uint64_t read_field(const BitString& bits, std::size_t offset, unsigned width) {
  std::uint64_t v = 0;
  for (unsigned b = 0; b < width; ++b) v = (v << 1) | (bits[offset + b] & 1u);
  return v;
}

void require_member(const SearchSpace& space, const Genome& genome) {
  if (!space.contains(genome)) throw std::out_of_range("genome outside of the encoded space");
}

}  // namespace

// --- basic ------------------------------------------------------------------

BasicEncoding::BasicEncoding(const SearchSpace& space)
    : space_(&space), width_(field_width(space.total_size())) {}

BitString BasicEncoding::encode(const Genome& genome) const {
  require_member(*space_, genome);
  BitString bits(width_);
  write_field(bits, 0, width_, space_->flat_index(genome));
  return bits;
}

std::optional<Genome> BasicEncoding::decode(const BitString& bits) const {
  if (bits.size() != width_) return std::nullopt;
  const auto index = read_field(bits, 0, width_);
  if (index >= space_->total_size()) return std::nullopt;
  return space_->from_flat(index);
}

// --- gray -------------------------------------------------------------------

GrayEncoding::GrayEncoding(const SearchSpace& space) : sizes_(space.gene_sizes()) {
  for (auto s : sizes_) {
    widths_.push_back(field_width(s));
    length_ += widths_.back();
  }
}

BitString GrayEncoding::encode(const Genome& genome) const {
  if (genome.size() != sizes_.size()) throw std::out_of_range("genome has the wrong number of genes");
  BitString bits(length_);
  std::size_t offset = 0;
  for (std::size_t i = 0; i < sizes_.size(); ++i) {
    if (genome[i] >= sizes_[i]) throw std::out_of_range("genome outside of the encoded space");
    write_field(bits, offset, widths_[i], gray(genome[i]));
    offset += widths_[i];
  }
  return bits;
}

std::optional<Genome> GrayEncoding::decode(const BitString& bits) const {
  if (bits.size() != length_) return std::nullopt;
  Genome g(sizes_.size());
  std::size_t offset = 0;
  for (std::size_t i = 0; i < sizes_.size(); ++i) {
    const auto v = gray_inverse(read_field(bits, offset, widths_[i]));
    if (v >= sizes_[i]) return std::nullopt;
    g[i] = static_cast<std::uint32_t>(v);
    offset += widths_[i];
  }
  return g;
}

// --- production guided --------------------------------------------------------

namespace {

PgOrder make_order(const StageOptions& options, double center) {
  PgOrder order;
  const auto sorted = order_by_closeness(options, center);
  order.position_at_rank.assign(sorted.begin(), sorted.end());
  order.rank_of_position.resize(sorted.size());
  for (std::size_t r = 0; r < sorted.size(); ++r) {
    order.rank_of_position[sorted[r]] = static_cast<std::uint32_t>(r);
  }
  return order;
}

}  // namespace

PgTables::PgTables(const ReducedSpace& space, bool chain)
    : space_(&space), chain_(chain), stage1_(make_order(space.stages[0], space.annual_target)) {}

const PgOrder& PgTables::conditional(int stage, double center) const {
  if (stage != 2 && stage != 3) throw std::out_of_range("conditional PG order exists for stages 2 and 3");
  std::lock_guard lock(mutex_);
  auto& memo = memo_[static_cast<std::size_t>(stage - 2)];
  auto it = memo.find(center);
  if (it == memo.end()) {
    auto order = std::make_unique<PgOrder>(make_order(space_->stages[static_cast<std::size_t>(stage - 1)], center));
    it = memo.emplace(center, std::move(order)).first;
  }
  return *it->second;
}

PgGrayEncoding::PgGrayEncoding(const ThreeBodySpace& space, bool chain)
    : space_(&space), tables_(space.reduced(), chain) {
  const auto sizes = space.reduced().sizes();
  for (std::size_t k = 0; k < kStages; ++k) {
    widths_[k] = field_width(sizes[k]);
    length_ += widths_[k];
  }
}

Genome PgGrayEncoding::ranks_of(const Genome& genome) const {
  require_member(*space_, genome);
  const auto& stages = space_->reduced().stages;
  const double key1 = stages[0].annual_estimate[genome[0]];
  const double key2 = stages[1].annual_estimate[genome[1]];
  return {tables_.stage1().rank_of_position[genome[0]],
          tables_.conditional(2, key1).rank_of_position[genome[1]],
          tables_.conditional(3, tables_.chained() ? key2 : key1).rank_of_position[genome[2]]};
}

Genome PgGrayEncoding::genome_of_ranks(const Genome& ranks) const {
  require_member(*space_, ranks);
  const auto& stages = space_->reduced().stages;
  const auto p1 = tables_.stage1().position_at_rank[ranks[0]];
  const double key1 = stages[0].annual_estimate[p1];
  const auto p2 = tables_.conditional(2, key1).position_at_rank[ranks[1]];
  const double key2 = stages[1].annual_estimate[p2];
  const auto p3 = tables_.conditional(3, tables_.chained() ? key2 : key1).position_at_rank[ranks[2]];
  return {p1, p2, p3};
}

BitString PgGrayEncoding::encode(const Genome& genome) const {
  const auto ranks = ranks_of(genome);
  BitString bits(length_);
  std::size_t offset = 0;
  for (std::size_t k = 0; k < kStages; ++k) {
    write_field(bits, offset, widths_[k], gray(ranks[k]));
    offset += widths_[k];
  }
  return bits;
}

std::optional<Genome> PgGrayEncoding::decode(const BitString& bits) const {
  if (bits.size() != length_) return std::nullopt;
  const auto& sizes = space_->gene_sizes();
  Genome ranks(kStages);
  std::size_t offset = 0;
  for (std::size_t k = 0; k < kStages; ++k) {
    const auto v = gray_inverse(read_field(bits, offset, widths_[k]));
    if (v >= sizes[k]) return std::nullopt;
    ranks[k] = static_cast<std::uint32_t>(v);
    offset += widths_[k];
  }
  return genome_of_ranks(ranks);
}

// --- 12-body ------------------------------------------------------------------

TwelveBodyGrayEncoding::TwelveBodyGrayEncoding(const TwelveBodySpace& space)
    : space_(&space),
      shift_width_(field_width(static_cast<std::uint64_t>(space.shift_count()))),
      rate_width_(field_width(static_cast<std::uint64_t>(space.rate_count()))),
      length_(kShops * (shift_width_ + rate_width_)) {}

BitString TwelveBodyGrayEncoding::encode_config(const LineConfig& config) const {
  if (!space_->genome_of(config)) throw std::out_of_range("config outside of the 12-body space");
  BitString bits(length_);
  for (std::size_t j = 0; j < kShops; ++j) {
    write_field(bits, j * shift_width_, shift_width_, gray(static_cast<std::uint64_t>(config.shops[j].shift_id - 1)));
    write_field(bits, kShops * shift_width_ + j * rate_width_, rate_width_,
                gray(static_cast<std::uint64_t>(config.shops[j].rate_id - 1)));
  }
  return bits;
}

std::optional<LineConfig> TwelveBodyGrayEncoding::decode_config(const BitString& bits) const {
  if (bits.size() != length_) return std::nullopt;
  LineConfig c;
  for (std::size_t j = 0; j < kShops; ++j) {
    const auto s = gray_inverse(read_field(bits, j * shift_width_, shift_width_));
    const auto r = gray_inverse(read_field(bits, kShops * shift_width_ + j * rate_width_, rate_width_));
    if (s >= static_cast<std::uint64_t>(space_->shift_count()) || r >= static_cast<std::uint64_t>(space_->rate_count())) {
      return std::nullopt;
    }
    c.shops[j] = {static_cast<int>(s) + 1, static_cast<int>(r) + 1};
  }
  if (!space_->genome_of(c)) return std::nullopt;  // e.g. non-nominal rate in noDev
  return c;
}

BitString TwelveBodyGrayEncoding::encode(const Genome& genome) const {
  require_member(*space_, genome);
  return encode_config(space_->decode(genome));
}

std::optional<Genome> TwelveBodyGrayEncoding::decode(const BitString& bits) const {
  auto c = decode_config(bits);
  if (!c) return std::nullopt;
  return space_->genome_of(*c);
}

std::unique_ptr<Encoding> make_encoding(Scheme scheme, const SearchSpace& space, EncodingOptions options) {
  switch (scheme) {
    case Scheme::basic:
      return std::make_unique<BasicEncoding>(space);
    case Scheme::gray:
      return std::make_unique<GrayEncoding>(space);
    case Scheme::pggray:
      if (auto* three = dynamic_cast<const ThreeBodySpace*>(&space)) {
        return std::make_unique<PgGrayEncoding>(*three, options.pg_chain);
      }
      throw std::invalid_argument("pggray encoding needs a 3-body space");
    case Scheme::twelvebody_gray:
      if (auto* twelve = dynamic_cast<const TwelveBodySpace*>(&space)) {
        return std::make_unique<TwelveBodyGrayEncoding>(*twelve);
      }
      throw std::invalid_argument("twelvebody-gray encoding needs a 12-body space");
  }
  throw std::invalid_argument("unknown scheme");
}

}  // namespace lineopt
