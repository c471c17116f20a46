#include "lineopt/space.hpp"

#include <sstream>
#include <stdexcept>

namespace lineopt {

std::string_view to_string(Parameterization p) {
  return p == Parameterization::three_body ? "3body" : "12body";
}

std::uint64_t SearchSpace::total_size() const {
  std::uint64_t n = 1;
  for (auto s : gene_sizes_) n *= s;
  return n;
}

bool SearchSpace::contains(const Genome& genome) const {
  if (genome.size() != gene_sizes_.size()) return false;
  for (std::size_t i = 0; i < genome.size(); ++i) {
    if (genome[i] >= gene_sizes_[i]) return false;
  }
  return true;
}

std::uint64_t SearchSpace::flat_index(const Genome& genome) const {
  std::uint64_t index = 0;
  for (std::size_t i = 0; i < genome.size(); ++i) index = index * gene_sizes_[i] + genome[i];
  return index;
}

Genome SearchSpace::from_flat(std::uint64_t index) const {
  Genome g(gene_sizes_.size());
  for (std::size_t i = gene_sizes_.size(); i-- > 0;) {
    g[i] = static_cast<std::uint32_t>(index % gene_sizes_[i]);
    index /= gene_sizes_[i];
  }
  return g;
}

ThreeBodySpace::ThreeBodySpace(ReducedSpace space) : space_(std::move(space)) {
  for (const auto& s : space_.stages) gene_sizes_.push_back(static_cast<std::uint32_t>(s.size()));
}

LineConfig ThreeBodySpace::decode(const Genome& genome) const {
  if (!contains(genome)) throw std::out_of_range("genome outside of 3-body space");
  return space_.config_of({genome[0], genome[1], genome[2]});
}

std::optional<Genome> ThreeBodySpace::genome_of(const LineConfig& config) const {
  auto t = space_.triple_of(config);
  if (!t) return std::nullopt;
  return Genome{static_cast<std::uint32_t>((*t)[0]), static_cast<std::uint32_t>((*t)[1]),
                static_cast<std::uint32_t>((*t)[2])};
}

std::string ThreeBodySpace::descriptor() const { return "3body:" + space_.label(); }

TwelveBodySpace::TwelveBodySpace(const ProblemCatalog& catalog, DevMode mode)
    : mode_(mode),
      shift_count_(catalog.shift_count()),
      rate_count_(catalog.rate_count()),
      nominal_(catalog.nominal_rate_id) {
  const int per_shop = mode == DevMode::no_dev ? shift_count_ : shift_count_ * rate_count_;
  gene_sizes_.assign(kShops, static_cast<std::uint32_t>(per_shop));
}

LineConfig TwelveBodySpace::decode(const Genome& genome) const {
  if (!contains(genome)) throw std::out_of_range("genome outside of 12-body space");
  LineConfig c;
  for (std::size_t j = 0; j < kShops; ++j) {
    const int v = static_cast<int>(genome[j]);
    if (mode_ == DevMode::no_dev) {
      c.shops[j] = {v + 1, nominal_};
    } else {
      c.shops[j] = {v / rate_count_ + 1, v % rate_count_ + 1};
    }
  }
  return c;
}

std::optional<Genome> TwelveBodySpace::genome_of(const LineConfig& config) const {
  Genome g(kShops);
  for (std::size_t j = 0; j < kShops; ++j) {
    const auto& s = config.shops[j];
    if (s.shift_id < 1 || s.shift_id > shift_count_ || s.rate_id < 1 || s.rate_id > rate_count_) {
      return std::nullopt;
    }
    if (mode_ == DevMode::no_dev) {
      if (s.rate_id != nominal_) return std::nullopt;
      g[j] = static_cast<std::uint32_t>(s.shift_id - 1);
    } else {
      g[j] = static_cast<std::uint32_t>((s.shift_id - 1) * rate_count_ + (s.rate_id - 1));
    }
  }
  return g;
}

std::string TwelveBodySpace::descriptor() const {
  return std::string("12body:") + std::string(to_string(mode_));
}

Genome random_genome(const SearchSpace& space, Rng& rng) {
  Genome g(space.gene_count());
  for (std::size_t i = 0; i < g.size(); ++i) {
    g[i] = static_cast<std::uint32_t>(uniform_index(rng, space.gene_sizes()[i]));
  }
  return g;
}

LineConfig random_config(const SearchSpace& space, Rng& rng) {
  return space.decode(random_genome(space, rng));
}

}  // namespace lineopt
