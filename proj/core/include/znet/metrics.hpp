#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "znet/preprocess.hpp"
#include "znet/volume.hpp"

namespace znet {

// Volumetric Dice similarity coefficient in percent:
// 100 * 2|A n B| / (|A| + |B|); 100 when both masks are empty.
double vdsc(const Volume& a, const Volume& b);

// Relative absolute volume difference in percent: 100 * ||A| - |B|| / |B|.
// Throws UndefinedMetricError when the reference is empty.
double ravd(const Volume& pred, const Volume& ref);

struct HausdorffOptions {
  bool percentile95 = false;  // default is the exact maximum
};

// Symmetric Hausdorff distance in mm between the 6-connectivity boundary
// voxel sets, Euclidean under the voxel spacing. Throws UndefinedMetricError
// when either mask is empty.
double hausdorff(const Volume& a, const Volume& b,
                 const HausdorffOptions& opt = {});

// All-pairs reference implementation; the optimized path must match it
// exactly.
double hausdorff_brute(const Volume& a, const Volume& b,
                       const HausdorffOptions& opt = {});

// Mask voxels with at least one 6-neighbor outside the mask (the volume
// border counts as background).
std::vector<std::array<int, 3>> boundary_voxels(const Volume& mask);

struct MetricReport {
  struct Case {
    std::string id;
    double vdsc = 0.0;
    std::optional<double> hd;
    std::optional<double> ravd;
    std::string note;  // reason a metric is undefined
  };
  struct Stat {
    double mean = 0.0;
    double sd = 0.0;  // sample (n-1) standard deviation
    int count = 0;
  };

  std::vector<Case> cases;

  // Aggregates are recomputed on demand, never stored.
  Stat vdsc_stat() const;
  std::optional<Stat> hd_stat() const;
  std::optional<Stat> ravd_stat() const;
};

struct EvalCase {
  std::string id;
  const Volume* pred = nullptr;
  const Volume* ref = nullptr;
};

// Per-case vDSC / HD / RAVD; undefined metrics are reported as such rather
// than coerced to 0 or infinity.
MetricReport evaluate(const std::vector<EvalCase>& cases,
                      const HausdorffOptions& opt = {});

// `case,vdsc,hd,ravd` rows at 2-decimal fixed precision plus a trailing
// comment block with mean +- sd summaries.
std::string report_csv(const MetricReport& report);
std::string report_table(const MetricReport& report);

// Round-trip simulation: unify each ground-truth mask, reconstruct it, and
// score against the original.
struct SimulationRow {
  UniformMethod method = UniformMethod::pad_cut;
  std::vector<double> per_case;
  double mean_vdsc = 0.0;
};

std::vector<SimulationRow> simulate_uniform(const std::vector<Volume>& masks,
                                            const std::vector<UniformMethod>& methods,
                                            int target_h = 256, int target_w = 256);

std::string simulation_csv(const std::vector<SimulationRow>& rows);
std::string simulation_table(const std::vector<SimulationRow>& rows);

}  // namespace znet
