#pragma once

// Roughness averaging: a discrete distribution of local separation offsets
// built from AFM height maps, and the weighted sums of the Lifshitz
// pressure and force over it.

#include "casimir/lifshitz.hpp"

#include <cstddef>
#include <filesystem>
#include <istream>
#include <vector>

namespace casimir::roughness {

struct Entry {
  double offset;  // m, added to the nominal separation
  double weight;
};

/// Normalized weights over separation offsets. Construction rescales the
/// weights to sum to one and rejects negative or non-finite values.
class RoughnessDistribution {
 public:
  explicit RoughnessDistribution(std::vector<Entry> entries);

  /// {(0, 1)}: the smooth-surface limit.
  static RoughnessDistribution flat();

  const std::vector<Entry>& entries() const { return entries_; }
  std::size_t size() const { return entries_.size(); }
  double min_offset() const;
  double mean_offset() const;

 private:
  std::vector<Entry> entries_;
};

/// Row-major grid of heights (m) measured outward from each surface, i.e.
/// toward the opposing body.
struct HeightMap {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> heights;
  double pixel_pitch = 0.0;  // m

  void validate() const;
};

inline constexpr std::size_t kDefaultBins = 21;

/// Distribution of the gap offset -(h1 + h2) for independent facing
/// surfaces, mean-centered and histogrammed into `bins` offsets. Bin
/// midpoints span exactly [min, max] of the summed variable; empty bins are
/// dropped. All-equal heights give the single entry {(0, 1)}.
RoughnessDistribution weights_from_heightmaps(const HeightMap& surface1,
                                              const HeightMap& surface2,
                                              std::size_t bins = kDefaultBins);

/// Same binning for one combined profile (heights already summed over both
/// surfaces).
RoughnessDistribution weights_from_heightmap(const HeightMap& combined,
                                             std::size_t bins = kDefaultBins);

/// sum_i w_i P(z + offset_i). Throws DomainError naming the first entry
/// whose shifted separation is not positive.
double averaged_pressure(double z, const RoughnessDistribution& dist,
                         const materials::DielectricModel& m1,
                         const materials::DielectricModel& m2,
                         const lifshitz::QuadratureOptions& opts = {});

/// sum_i w_i F(z + offset_i) for a sphere of radius R.
double averaged_force(double z, double radius, const RoughnessDistribution& dist,
                      const materials::DielectricModel& m1,
                      const materials::DielectricModel& m2,
                      const lifshitz::QuadratureOptions& opts = {});

/// Plain-text matrix reader: whitespace-separated heights in meters, one
/// scan line per row; `#` lines are comments, one of which must carry
/// `pixel_pitch = <meters>`.
HeightMap parse_heightmap(std::istream& in, const std::string& source);
HeightMap load_heightmap(const std::filesystem::path& path);

}  // namespace casimir::roughness
