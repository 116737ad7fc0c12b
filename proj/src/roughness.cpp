#include "casimir/roughness.hpp"

#include "casimir/errors.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <regex>
#include <sstream>

namespace casimir::roughness {

namespace {

std::vector<double> centered(const HeightMap& m) {
  const double mean =
      std::accumulate(m.heights.begin(), m.heights.end(), 0.0) /
      static_cast<double>(m.heights.size());
  std::vector<double> out(m.heights.size());
  std::transform(m.heights.begin(), m.heights.end(), out.begin(),
                 [mean](double h) { return h - mean; });
  return out;
}

// Histogram of s = -(a + b) over all pairs (a, b), with `bins` midpoints
// spanning [min s, max s]. `b` must be sorted ascending.
RoughnessDistribution histogram_of_sum(const std::vector<double>& a,
                                       const std::vector<double>& b_sorted,
                                       std::size_t bins) {
  if (bins == 0) throw DomainError("roughness histogram needs at least one bin");
  const auto [a_min, a_max] = std::minmax_element(a.begin(), a.end());
  const double lo = -(*a_max + b_sorted.back());
  const double hi = -(*a_min + b_sorted.front());
  const double scale = std::max({std::abs(lo), std::abs(hi), 1e-300});
  if (bins == 1 || hi - lo <= 1e-12 * scale) return RoughnessDistribution::flat();

  const double width = (hi - lo) / static_cast<double>(bins - 1);
  std::map<double, std::size_t> unique_a;
  for (double v : a) ++unique_a[v];

  std::vector<double> counts(bins, 0.0);
  const auto n_b = b_sorted.size();
  for (const auto& [value, multiplicity] : unique_a) {
    // Entries of b falling into bins [0, k) satisfy b > threshold(k).
    std::size_t below_prev = 0;
    for (std::size_t k = 1; k <= bins; ++k) {
      std::size_t below = n_b;
      if (k < bins) {
        const double threshold =
            -value - lo - (static_cast<double>(k) - 0.5) * width;
        below = static_cast<std::size_t>(
            b_sorted.end() -
            std::upper_bound(b_sorted.begin(), b_sorted.end(), threshold));
      }
      counts[k - 1] += static_cast<double>(multiplicity) *
                       static_cast<double>(below - below_prev);
      below_prev = below;
    }
  }

  const double total = static_cast<double>(a.size()) * static_cast<double>(n_b);
  std::vector<Entry> entries;
  double mean = 0.0;
  for (std::size_t k = 0; k < bins; ++k) {
    if (counts[k] == 0.0) continue;
    const double offset = lo + static_cast<double>(k) * width;
    entries.push_back({offset, counts[k] / total});
    mean += offset * counts[k] / total;
  }
  // Binning can leave a residual mean of order one bin width; remove it.
  for (auto& e : entries) e.offset -= mean;
  return RoughnessDistribution(std::move(entries));
}

}  // namespace

RoughnessDistribution::RoughnessDistribution(std::vector<Entry> entries)
    : entries_(std::move(entries)) {
  if (entries_.empty()) throw ValidationError("roughness distribution is empty");
  double sum = 0.0;
  for (const auto& e : entries_) {
    if (!std::isfinite(e.offset)) throw ValidationError("roughness offset not finite");
    if (!(e.weight >= 0.0) || !std::isfinite(e.weight)) {
      throw ValidationError("roughness weights must be non-negative");
    }
    sum += e.weight;
  }
  if (!(sum > 0.0)) throw ValidationError("roughness weights sum to zero");
  for (auto& e : entries_) e.weight /= sum;
}

RoughnessDistribution RoughnessDistribution::flat() {
  return RoughnessDistribution({{0.0, 1.0}});
}

double RoughnessDistribution::min_offset() const {
  return std::min_element(entries_.begin(), entries_.end(),
                          [](const Entry& a, const Entry& b) {
                            return a.offset < b.offset;
                          })
      ->offset;
}

double RoughnessDistribution::mean_offset() const {
  double m = 0.0;
  for (const auto& e : entries_) m += e.weight * e.offset;
  return m;
}

void HeightMap::validate() const {
  if (rows == 0 || cols == 0 || heights.empty()) {
    throw ValidationError("height map is empty");
  }
  if (heights.size() != rows * cols) {
    throw ValidationError("height map size does not match rows x cols");
  }
  for (double h : heights) {
    if (!std::isfinite(h)) throw ValidationError("height map has non-finite values");
  }
  if (!(pixel_pitch > 0.0)) throw ValidationError("pixel pitch must be positive");
}

RoughnessDistribution weights_from_heightmaps(const HeightMap& surface1,
                                              const HeightMap& surface2,
                                              std::size_t bins) {
  surface1.validate();
  surface2.validate();
  auto b = centered(surface2);
  std::sort(b.begin(), b.end());
  return histogram_of_sum(centered(surface1), b, bins);
}

RoughnessDistribution weights_from_heightmap(const HeightMap& combined,
                                             std::size_t bins) {
  combined.validate();
  return histogram_of_sum(centered(combined), {0.0}, bins);
}

namespace {

void check_shifted(double z, const RoughnessDistribution& dist) {
  const auto& entries = dist.entries();
  for (std::size_t i = 0; i < entries.size(); ++i) {
    if (!(z + entries[i].offset > 0.0)) {
      std::ostringstream os;
      os << "roughness entry " << i << " (offset " << entries[i].offset
         << " m) shifts separation " << z << " m to a non-positive value";
      throw DomainError(os.str());
    }
  }
}

}  // namespace

double averaged_pressure(double z, const RoughnessDistribution& dist,
                         const materials::DielectricModel& m1,
                         const materials::DielectricModel& m2,
                         const lifshitz::QuadratureOptions& opts) {
  check_shifted(z, dist);
  double sum = 0.0;
  for (const auto& e : dist.entries()) {
    sum += e.weight * lifshitz::pressure_plane_plane(z + e.offset, m1, m2, opts).value;
  }
  return sum;
}

double averaged_force(double z, double radius, const RoughnessDistribution& dist,
                      const materials::DielectricModel& m1,
                      const materials::DielectricModel& m2,
                      const lifshitz::QuadratureOptions& opts) {
  check_shifted(z, dist);
  double sum = 0.0;
  for (const auto& e : dist.entries()) {
    sum += e.weight *
           lifshitz::force_sphere_plane(z + e.offset, radius, m1, m2, opts).value;
  }
  return sum;
}

HeightMap parse_heightmap(std::istream& in, const std::string& source) {
  static const std::regex pitch_re(
      R"(pixel_pitch\s*[=:]\s*([-+0-9.eE]+))");
  HeightMap map;
  std::string line;
  std::size_t line_no = 0;
  bool have_pitch = false;
  while (std::getline(in, line)) {
    ++line_no;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos) continue;
    if (line[first] == '#') {
      std::smatch m;
      if (std::regex_search(line, m, pitch_re)) {
        try {
          map.pixel_pitch = std::stod(m[1].str());
        } catch (const std::logic_error&) {
          throw ParseError(source + ": malformed pixel_pitch", line_no);
        }
        have_pitch = true;
      }
      continue;
    }
    std::istringstream row(line);
    std::size_t n = 0;
    std::string token;
    while (row >> token) {
      try {
        std::size_t used = 0;
        map.heights.push_back(std::stod(token, &used));
        if (used != token.size()) throw std::invalid_argument(token);
      } catch (const std::logic_error&) {
        throw ParseError(source + ": malformed height '" + token + "'", line_no);
      }
      ++n;
    }
    if (map.rows == 0) {
      map.cols = n;
    } else if (n != map.cols) {
      throw ParseError(source + ": ragged row", line_no);
    }
    ++map.rows;
  }
  if (!have_pitch) throw ParseError(source + ": missing '# pixel_pitch = ...'", line_no);
  map.validate();
  return map;
}

HeightMap load_heightmap(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open height map: " + path.string());
  return parse_heightmap(in, path.string());
}

}  // namespace casimir::roughness
