#pragma once

// Categorical search spaces seen by the solvers. A genome holds one value per
// gene: three stage-state positions in the 3-body view, six shop states in the
// 12-body view.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "lineopt/catalog.hpp"
#include "lineopt/freestage.hpp"
#include "lineopt/rng.hpp"
#include "lineopt/simulator.hpp"

namespace lineopt {

enum class Parameterization { three_body, twelve_body };

std::string_view to_string(Parameterization p);

using Genome = std::vector<std::uint32_t>;

class SearchSpace {
 public:
  virtual ~SearchSpace() = default;

  virtual Parameterization parameterization() const = 0;
  virtual LineConfig decode(const Genome& genome) const = 0;
  virtual std::optional<Genome> genome_of(const LineConfig& config) const = 0;
  virtual std::string descriptor() const = 0;

  const std::vector<std::uint32_t>& gene_sizes() const { return gene_sizes_; }
  std::size_t gene_count() const { return gene_sizes_.size(); }
  std::uint64_t total_size() const;
  bool contains(const Genome& genome) const;

  /// Mixed-radix index, first gene most significant.
  std::uint64_t flat_index(const Genome& genome) const;
  Genome from_flat(std::uint64_t index) const;

 protected:
  std::vector<std::uint32_t> gene_sizes_;
};

class ThreeBodySpace final : public SearchSpace {
 public:
  explicit ThreeBodySpace(ReducedSpace space);

  Parameterization parameterization() const override { return Parameterization::three_body; }
  LineConfig decode(const Genome& genome) const override;
  std::optional<Genome> genome_of(const LineConfig& config) const override;
  std::string descriptor() const override;

  const ReducedSpace& reduced() const { return space_; }

 private:
  ReducedSpace space_;
};

/// Six independent shops; in noDev every rate is the nominal one.
class TwelveBodySpace final : public SearchSpace {
 public:
  TwelveBodySpace(const ProblemCatalog& catalog, DevMode mode);

  Parameterization parameterization() const override { return Parameterization::twelve_body; }
  LineConfig decode(const Genome& genome) const override;
  std::optional<Genome> genome_of(const LineConfig& config) const override;
  std::string descriptor() const override;

  DevMode dev_mode() const { return mode_; }
  int shift_count() const { return shift_count_; }
  int rate_count() const { return rate_count_; }
  int nominal_rate_id() const { return nominal_; }

 private:
  DevMode mode_;
  int shift_count_;
  int rate_count_;
  int nominal_;
};

Genome random_genome(const SearchSpace& space, Rng& rng);
/// Uniform over the space (uniform per gene).
LineConfig random_config(const SearchSpace& space, Rng& rng);

}  // namespace lineopt
