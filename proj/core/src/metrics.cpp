#include "znet/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

namespace znet {

namespace {

void check_mask(const Volume& v, const char* which) {
  if (!v.is_binary()) {
    throw ContractError(std::string("metric input '") + which + "' is not binary");
  }
}

void check_same_grid(const Volume& a, const Volume& b) {
  if (!a.same_grid(b)) {
    throw ShapeError("metric inputs disagree on dims");
  }
}

// Squared physical distance between voxel centers. Both Hausdorff paths must
// evaluate exactly this expression so the optimized result is bit-equal to
// the brute force.
inline double dist2(const std::array<int, 3>& a, const std::array<int, 3>& b,
                    const std::array<double, 3>& sp) {
  const double dz = (a[0] - b[0]) * sp[0];
  const double dy = (a[1] - b[1]) * sp[1];
  const double dx = (a[2] - b[2]) * sp[2];
  return dz * dz + dy * dy + dx * dx;
}

// kd-tree over boundary voxels; queries evaluate dist2 on candidate pairs
// only, so exactness is preserved.
class KdTree3 {
 public:
  KdTree3(std::vector<std::array<int, 3>> pts, std::array<double, 3> spacing)
      : pts_(std::move(pts)), sp_(spacing) {
    build(0, pts_.size(), 0);
  }

  double nearest_d2(const std::array<int, 3>& q) const {
    double best = std::numeric_limits<double>::infinity();
    search(q, 0, pts_.size(), 0, best);
    return best;
  }

 private:
  void build(std::size_t lo, std::size_t hi, int axis) {
    if (hi - lo <= 1) return;
    const std::size_t mid = (lo + hi) / 2;
    std::nth_element(pts_.begin() + lo, pts_.begin() + mid, pts_.begin() + hi,
                     [axis](const auto& a, const auto& b) { return a[axis] < b[axis]; });
    build(lo, mid, (axis + 1) % 3);
    build(mid + 1, hi, (axis + 1) % 3);
  }

  void search(const std::array<int, 3>& q, std::size_t lo, std::size_t hi, int axis,
              double& best) const {
    if (lo >= hi) return;
    const std::size_t mid = (lo + hi) / 2;
    const double d = dist2(q, pts_[mid], sp_);
    if (d < best) best = d;
    if (hi - lo == 1) return;
    const double axis_delta = (q[axis] - pts_[mid][axis]) * sp_[axis];
    const double axis_d2 = axis_delta * axis_delta;
    const bool go_left_first = q[axis] < pts_[mid][axis];
    const int next = (axis + 1) % 3;
    if (go_left_first) {
      search(q, lo, mid, next, best);
      if (axis_d2 <= best) search(q, mid + 1, hi, next, best);
    } else {
      search(q, mid + 1, hi, next, best);
      if (axis_d2 <= best) search(q, lo, mid, next, best);
    }
  }

  std::vector<std::array<int, 3>> pts_;
  std::array<double, 3> sp_;
};

// Directed distances-squared from every point of `from` to its nearest
// neighbor in `tree`.
std::vector<double> directed_d2(const std::vector<std::array<int, 3>>& from,
                                const KdTree3& tree) {
  std::vector<double> out;
  out.reserve(from.size());
  for (const auto& p : from) out.push_back(tree.nearest_d2(p));
  return out;
}

std::vector<double> directed_d2_brute(const std::vector<std::array<int, 3>>& from,
                                      const std::vector<std::array<int, 3>>& to,
                                      const std::array<double, 3>& sp) {
  std::vector<double> out;
  out.reserve(from.size());
  for (const auto& a : from) {
    double best = std::numeric_limits<double>::infinity();
    for (const auto& b : to) {
      const double d = dist2(a, b, sp);
      if (d < best) best = d;
    }
    out.push_back(best);
  }
  return out;
}

// Exact max by default; in percentile mode the nearest-rank 95th percentile
// of each directed distance set.
double combine_directed(std::vector<double> d_ab, std::vector<double> d_ba,
                        const HausdorffOptions& opt) {
  auto pick = [&](std::vector<double>& v) {
    if (!opt.percentile95) return *std::max_element(v.begin(), v.end());
    std::sort(v.begin(), v.end());
    const std::size_t rank =
        static_cast<std::size_t>(std::ceil(0.95 * static_cast<double>(v.size())));
    return v[std::max<std::size_t>(rank, 1) - 1];
  };
  return std::sqrt(std::max(pick(d_ab), pick(d_ba)));
}

std::array<double, 3> check_hausdorff_inputs(const Volume& a, const Volume& b) {
  check_mask(a, "a");
  check_mask(b, "b");
  check_same_grid(a, b);
  if (a.spacing != b.spacing) {
    throw ShapeError("hausdorff: inputs disagree on spacing");
  }
  return a.spacing;
}

}  // namespace

double vdsc(const Volume& a, const Volume& b) {
  check_mask(a, "a");
  check_mask(b, "b");
  check_same_grid(a, b);
  std::size_t ca = 0, cb = 0, inter = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const bool va = a.data[i] == 1.0f;
    const bool vb = b.data[i] == 1.0f;
    ca += va;
    cb += vb;
    inter += va && vb;
  }
  if (ca + cb == 0) return 100.0;
  return 100.0 * 2.0 * static_cast<double>(inter) / static_cast<double>(ca + cb);
}

double ravd(const Volume& pred, const Volume& ref) {
  check_mask(pred, "pred");
  check_mask(ref, "ref");
  const double va = static_cast<double>(pred.foreground_count());
  const double vb = static_cast<double>(ref.foreground_count());
  if (vb == 0.0) {
    throw UndefinedMetricError("ravd undefined: reference mask is empty");
  }
  return 100.0 * std::abs(va - vb) / vb;
}

std::vector<std::array<int, 3>> boundary_voxels(const Volume& mask) {
  std::vector<std::array<int, 3>> out;
  for (int z = 0; z < mask.d; ++z) {
    for (int y = 0; y < mask.h; ++y) {
      for (int x = 0; x < mask.w; ++x) {
        if (mask.at(z, y, x) != 1.0f) continue;
        const bool border =
            z == 0 || z == mask.d - 1 || y == 0 || y == mask.h - 1 || x == 0 ||
            x == mask.w - 1 || mask.at(z - 1, y, x) == 0.0f ||
            mask.at(z + 1, y, x) == 0.0f || mask.at(z, y - 1, x) == 0.0f ||
            mask.at(z, y + 1, x) == 0.0f || mask.at(z, y, x - 1) == 0.0f ||
            mask.at(z, y, x + 1) == 0.0f;
        if (border) out.push_back({z, y, x});
      }
    }
  }
  return out;
}

double hausdorff(const Volume& a, const Volume& b, const HausdorffOptions& opt) {
  const auto sp = check_hausdorff_inputs(a, b);
  const auto ba = boundary_voxels(a);
  const auto bb = boundary_voxels(b);
  if (ba.empty() || bb.empty()) {
    throw UndefinedMetricError("hausdorff undefined: empty mask");
  }
  const KdTree3 tree_b(bb, sp);
  const KdTree3 tree_a(ba, sp);
  return combine_directed(directed_d2(ba, tree_b), directed_d2(bb, tree_a), opt);
}

double hausdorff_brute(const Volume& a, const Volume& b, const HausdorffOptions& opt) {
  const auto sp = check_hausdorff_inputs(a, b);
  const auto ba = boundary_voxels(a);
  const auto bb = boundary_voxels(b);
  if (ba.empty() || bb.empty()) {
    throw UndefinedMetricError("hausdorff undefined: empty mask");
  }
  return combine_directed(directed_d2_brute(ba, bb, sp), directed_d2_brute(bb, ba, sp),
                          opt);
}

namespace {

MetricReport::Stat stat_of(const std::vector<double>& xs) {
  MetricReport::Stat s;
  s.count = static_cast<int>(xs.size());
  if (xs.empty()) return s;
  double sum = 0.0;
  for (double x : xs) sum += x;
  s.mean = sum / xs.size();
  if (xs.size() > 1) {
    double ss = 0.0;
    for (double x : xs) ss += (x - s.mean) * (x - s.mean);
    s.sd = std::sqrt(ss / (xs.size() - 1));
  }
  return s;
}

std::string fmt2(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

}  // namespace

MetricReport::Stat MetricReport::vdsc_stat() const {
  std::vector<double> xs;
  for (const auto& c : cases) xs.push_back(c.vdsc);
  return stat_of(xs);
}

std::optional<MetricReport::Stat> MetricReport::hd_stat() const {
  std::vector<double> xs;
  for (const auto& c : cases) {
    if (c.hd) xs.push_back(*c.hd);
  }
  if (xs.empty()) return std::nullopt;
  return stat_of(xs);
}

std::optional<MetricReport::Stat> MetricReport::ravd_stat() const {
  std::vector<double> xs;
  for (const auto& c : cases) {
    if (c.ravd) xs.push_back(*c.ravd);
  }
  if (xs.empty()) return std::nullopt;
  return stat_of(xs);
}

MetricReport evaluate(const std::vector<EvalCase>& cases, const HausdorffOptions& opt) {
  MetricReport report;
  for (const auto& ec : cases) {
    if (!ec.pred || !ec.ref) throw ConfigError("evaluate: null case volume");
    if (!ec.pred->same_grid(*ec.ref)) {
      throw ConfigError("evaluate: case '" + ec.id + "' dims mismatch");
    }
    MetricReport::Case c;
    c.id = ec.id;
    c.vdsc = vdsc(*ec.pred, *ec.ref);
    try {
      c.hd = hausdorff(*ec.pred, *ec.ref, opt);
    } catch (const UndefinedMetricError& e) {
      c.note = e.what();
    }
    try {
      c.ravd = ravd(*ec.pred, *ec.ref);
    } catch (const UndefinedMetricError& e) {
      if (!c.note.empty()) c.note += "; ";
      c.note += e.what();
    }
    report.cases.push_back(std::move(c));
  }
  return report;
}

std::string report_csv(const MetricReport& report) {
  std::string out = "case,vdsc,hd,ravd\n";
  for (const auto& c : report.cases) {
    out += c.id + "," + fmt2(c.vdsc) + ",";
    out += c.hd ? fmt2(*c.hd) : "undefined";
    out += ",";
    out += c.ravd ? fmt2(*c.ravd) : "undefined";
    out += "\n";
  }
  const auto vs = report.vdsc_stat();
  out += "# vdsc mean " + fmt2(vs.mean) + " sd " + fmt2(vs.sd) + " n " +
         std::to_string(vs.count) + "\n";
  if (const auto hs = report.hd_stat()) {
    out += "# hd mean " + fmt2(hs->mean) + " sd " + fmt2(hs->sd) + " n " +
           std::to_string(hs->count) + "\n";
  } else {
    out += "# hd undefined for all cases\n";
  }
  if (const auto rs = report.ravd_stat()) {
    out += "# ravd mean " + fmt2(rs->mean) + " sd " + fmt2(rs->sd) + " n " +
           std::to_string(rs->count) + "\n";
  } else {
    out += "# ravd undefined for all cases\n";
  }
  return out;
}

std::string report_table(const MetricReport& report) {
  std::string out;
  char buf[160];
  std::snprintf(buf, sizeof(buf), "%-12s %10s %10s %10s\n", "case", "vDSC [%]",
                "HD [mm]", "RAVD [%]");
  out += buf;
  for (const auto& c : report.cases) {
    std::snprintf(buf, sizeof(buf), "%-12s %10s %10s %10s\n", c.id.c_str(),
                  fmt2(c.vdsc).c_str(), c.hd ? fmt2(*c.hd).c_str() : "undef",
                  c.ravd ? fmt2(*c.ravd).c_str() : "undef");
    out += buf;
  }
  const auto vs = report.vdsc_stat();
  const auto hs = report.hd_stat();
  const auto rs = report.ravd_stat();
  std::snprintf(buf, sizeof(buf), "%-12s %4s+-%-4s %4s+-%-4s %4s+-%-4s\n", "mean",
                fmt2(vs.mean).c_str(), fmt2(vs.sd).c_str(),
                hs ? fmt2(hs->mean).c_str() : "--", hs ? fmt2(hs->sd).c_str() : "--",
                rs ? fmt2(rs->mean).c_str() : "--", rs ? fmt2(rs->sd).c_str() : "--");
  out += buf;
  return out;
}

std::vector<SimulationRow> simulate_uniform(const std::vector<Volume>& masks,
                                            const std::vector<UniformMethod>& methods,
                                            int target_h, int target_w) {
  for (const auto& m : masks) check_mask(m, "simulate input");
  std::vector<SimulationRow> rows;
  for (UniformMethod method : methods) {
    SimulationRow row;
    row.method = method;
    double total = 0.0;
    for (std::size_t i = 0; i < masks.size(); ++i) {
      try {
        auto [unified, rec] = unify(masks[i], method, target_h, target_w);
        const Volume back = reconstruct(unified, rec);
        const double v = vdsc(back, masks[i]);
        row.per_case.push_back(v);
        total += v;
      } catch (const Error& e) {
        throw GeometryError("simulate: case " + std::to_string(i) + " with method " +
                            uniform_method_name(method) + ": " + e.what());
      }
    }
    row.mean_vdsc = masks.empty() ? 0.0 : total / static_cast<double>(masks.size());
    rows.push_back(std::move(row));
  }
  return rows;
}

std::string simulation_csv(const std::vector<SimulationRow>& rows) {
  std::string out = "method,mean_vdsc\n";
  for (const auto& r : rows) {
    out += std::string(uniform_method_name(r.method)) + "," + fmt2(r.mean_vdsc) + "\n";
  }
  for (const auto& r : rows) {
    out += std::string("# ") + uniform_method_name(r.method) + " per-case:";
    for (double v : r.per_case) out += " " + fmt2(v);
    out += "\n";
  }
  return out;
}

std::string simulation_table(const std::vector<SimulationRow>& rows) {
  std::string out;
  char buf[96];
  std::snprintf(buf, sizeof(buf), "%-12s %16s\n", "method", "mean vDSC [%]");
  out += buf;
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof(buf), "%-12s %16s\n", uniform_method_name(r.method),
                  fmt2(r.mean_vdsc).c_str());
    out += buf;
  }
  return out;
}

}  // namespace znet
