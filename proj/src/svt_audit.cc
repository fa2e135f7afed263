//
// Copyright 2026 The PrivTree Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//

#include "privtree/svt_audit.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "absl/status/status.h"
#include "absl/strings/str_cat.h"
#include "absl/strings/str_join.h"
#include "boost/math/quadrature/gauss_kronrod.hpp"
#include "privtree/laplace.h"
#include "privtree/status_macros.h"

namespace privtree {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr unsigned kMaxDepth = 20;
// The far tails carry a negligible share of the mass.
constexpr unsigned kFarTailDepth = 4;

struct Piece {
  double value = 0;
  double error = 0;
};

template <typename F>
Piece Gk(F f, double a, double b, double tol, unsigned max_depth = kMaxDepth) {
  Piece p;
  p.value = boost::math::quadrature::gauss_kronrod<double, 15>::integrate(
      f, a, b, max_depth, tol, &p.error);
  return p;
}

double LaplaceLogPdf(double x, double scale) {
  return -std::log(2 * scale) - std::abs(x) / scale;
}

}  // namespace

absl::StatusOr<double> LogIntegrate(
    const std::function<double(double)>& log_integrand,
    std::vector<double> breakpoints, double tail_scale, double upper_limit,
    double rel_tol) {
  if (!(tail_scale > 0)) {
    return absl::InvalidArgumentError("tail scale must be positive");
  }
  std::sort(breakpoints.begin(), breakpoints.end());
  breakpoints.erase(std::unique(breakpoints.begin(), breakpoints.end()),
                    breakpoints.end());
  const bool bounded = std::isfinite(upper_limit);
  if (bounded) {
    while (!breakpoints.empty() && breakpoints.back() >= upper_limit) {
      breakpoints.pop_back();
    }
    breakpoints.push_back(upper_limit);
  }
  if (breakpoints.empty()) breakpoints.push_back(0.0);

  // Shift by the largest sampled value so tiny probabilities do not
  // underflow.
  double shift = -kInf;
  auto probe = [&](double x) { shift = std::max(shift, log_integrand(x)); };
  for (size_t i = 0; i < breakpoints.size(); ++i) {
    probe(breakpoints[i]);
    if (i + 1 < breakpoints.size()) {
      probe(0.5 * (breakpoints[i] + breakpoints[i + 1]));
    }
  }
  probe(breakpoints.front() - tail_scale);
  if (!bounded) probe(breakpoints.back() + tail_scale);
  if (!std::isfinite(shift)) {
    if (shift == -kInf) return -kInf;
    return absl::InternalError("integrand is not finite at the breakpoints");
  }
  auto h = [&](double x) { return std::exp(log_integrand(x) - shift); };

  // Each tail is a finite stretch of kTailSpan scales integrated directly,
  // plus the remainder under x = b -/+ tail_scale * ln(u), whose mass is
  // below exp(-kTailSpan) of the stretch.
  constexpr double kTailSpan = 30;
  const double span = kTailSpan * tail_scale;
  const double tol = rel_tol * 1e-2;
  std::vector<Piece> pieces;
  const double lo = breakpoints.front() - span;
  pieces.push_back(Gk(
      [&](double u) {
        return u <= 0 ? 0.0 : h(lo + tail_scale * std::log(u)) * tail_scale / u;
      },
      0.0, 1.0, tol, kFarTailDepth));
  pieces.push_back(Gk(h, lo, breakpoints.front(), tol));
  for (size_t i = 0; i + 1 < breakpoints.size(); ++i) {
    pieces.push_back(Gk(h, breakpoints[i], breakpoints[i + 1], tol));
  }
  if (!bounded) {
    const double hi = breakpoints.back() + span;
    pieces.push_back(Gk(h, breakpoints.back(), hi, tol));
    pieces.push_back(Gk(
        [&](double u) {
          return u <= 0 ? 0.0
                        : h(hi - tail_scale * std::log(u)) * tail_scale / u;
        },
        0.0, 1.0, tol, kFarTailDepth));
  }
  double total = 0, error = 0;
  for (const Piece& p : pieces) {
    total += p.value;
    error += p.error;
  }
  if (!std::isfinite(total) || total < 0) {
    return absl::InternalError(absl::StrCat(
        "quadrature produced an invalid value ", total, " over breakpoints [",
        absl::StrJoin(breakpoints, ", "), "]"));
  }
  if (total == 0) return -kInf;
  if (error > rel_tol * total) {
    return absl::InternalError(absl::StrCat(
        "quadrature did not converge: estimated relative error ",
        error / total, " exceeds ", rel_tol, " over breakpoints [",
        absl::StrJoin(breakpoints, ", "), "]"));
  }
  return std::log(total) + shift;
}

absl::StatusOr<double> LogEventProbability(const SvtEvent& e) {
  ASSIGN_OR_RETURN(const LaplaceDistribution q,
                   LaplaceDistribution::Create(e.query_scale));
  if (!(e.threshold_scale > 0)) {
    return absl::InvalidArgumentError("threshold scale must be positive");
  }
  double upper = kInf;
  double log_density = 0;
  for (const auto& [answer, value] : e.released) {
    upper = std::min(upper, value);
    log_density += LaplaceLogPdf(value - answer, e.query_scale);
  }
  std::vector<double> breakpoints = {e.theta};
  breakpoints.insert(breakpoints.end(), e.above.begin(), e.above.end());
  breakpoints.insert(breakpoints.end(), e.below.begin(), e.below.end());
  // Pr[q + Lap > x] = Survival(x - q); Pr[q + Lap <= x] = Cdf(x - q).
  auto log_integrand = [&](double x) {
    double s = LaplaceLogPdf(x - e.theta, e.threshold_scale);
    for (double a : e.above) s += q.LogSurvival(x - a);
    for (double b : e.below) s += q.LogCdf(x - b);
    return s;
  };
  ASSIGN_OR_RETURN(const double log_mass,
                   LogIntegrate(log_integrand, std::move(breakpoints),
                                e.threshold_scale, upper));
  return log_mass + log_density;
}

absl::StatusOr<double> BinarySvtLogRatio(int k, double theta, double lambda) {
  if (k < 2 || k % 2 != 0) {
    return absl::InvalidArgumentError(
        absl::StrCat("k must be an even integer >= 2, got ", k));
  }
  if (!(lambda > 0)) return absl::InvalidArgumentError("lambda must be > 0");
  // Answers: D1 = {a, b} gives count(a) = 1, count(b) = 1; D3 = {b, b}
  // gives 0 and 2.
  auto event = [&](double qa, double qb) {
    SvtEvent e;
    e.theta = theta;
    e.threshold_scale = lambda;
    e.query_scale = lambda;
    e.above.assign(k / 2, qa);
    e.below.assign(k / 2, qb);
    return e;
  };
  ASSIGN_OR_RETURN(const double p1, LogEventProbability(event(1, 1)));
  ASSIGN_OR_RETURN(const double p3, LogEventProbability(event(0, 2)));
  return p1 - p3;
}

absl::StatusOr<double> VanillaSvtLogRatio(int k, double lambda) {
  if (k < 1) {
    return absl::InvalidArgumentError(
        absl::StrCat("k must be at least 1, got ", k));
  }
  if (!(lambda > 0)) return absl::InvalidArgumentError("lambda must be > 0");
  // For thresholds below 1 each placeholder contributes exp(1 / lambda) and
  // the released value another exp(1 / lambda).
  return k / lambda;
}

absl::StatusOr<double> VanillaSvtLogRatioByQuadrature(int k, double lambda) {
  if (k < 1) {
    return absl::InvalidArgumentError(
        absl::StrCat("k must be at least 1, got ", k));
  }
  if (!(lambda > 0)) return absl::InvalidArgumentError("lambda must be > 0");
  // D1 = {a, b}: count(a) = 1, count(b) = 1. D3 = {a, a}: 2 and 0.
  auto event = [&](double qa, double qb) {
    SvtEvent e;
    e.theta = 0;
    e.threshold_scale = lambda;
    e.query_scale = lambda;  // t = 1
    e.below.assign(k - 1, qa);
    e.released = {{qb, 1.0}};
    return e;
  };
  ASSIGN_OR_RETURN(const double p1, LogEventProbability(event(1, 1)));
  ASSIGN_OR_RETURN(const double p3, LogEventProbability(event(2, 0)));
  return p1 - p3;
}

namespace {

bool ValidPattern(absl::Span<const int> bits, size_t stream_length, int t) {
  if (bits.size() > stream_length) return false;
  int ones = 0;
  for (size_t i = 0; i < bits.size(); ++i) {
    if (bits[i] != 0 && bits[i] != 1) return false;
    ones += bits[i];
    if (ones == t) return i + 1 == bits.size();
  }
  return bits.size() == stream_length;
}

}  // namespace

absl::StatusOr<double> ImprovedSvtLogRatio(const AuditScenario& s,
                                           double lambda, int t) {
  if (!(lambda > 0)) return absl::InvalidArgumentError("lambda must be > 0");
  if (t < 1) return absl::InvalidArgumentError("t must be at least 1");
  if (!ValidPattern(s.outputs, s.query_labels.size(), t)) {
    return absl::InvalidArgumentError(absl::StrCat(
        "scenario '", s.name, "': output pattern cannot be produced with t = ",
        t));
  }
  auto event = [&](const TupleDataset& d) {
    SvtEvent e;
    e.theta = s.theta;
    e.threshold_scale = lambda;
    e.query_scale = t * lambda;
    for (size_t i = 0; i < s.outputs.size(); ++i) {
      const double q = static_cast<double>(
          std::count(d.begin(), d.end(), s.query_labels[i]));
      (s.outputs[i] == 1 ? e.above : e.below).push_back(q);
    }
    return e;
  };
  ASSIGN_OR_RETURN(const double p, LogEventProbability(event(s.d)));
  ASSIGN_OR_RETURN(const double p_prime, LogEventProbability(event(s.d_prime)));
  return p - p_prime;
}

namespace {

// Every valid output pattern of the improved variant for a stream of length
// n: n bits with fewer than t ones, or a prefix ending at the t-th one.
std::vector<std::vector<int>> ValidPatterns(int n, int t) {
  std::vector<std::vector<int>> out;
  for (int len = 1; len <= n; ++len) {
    for (int mask = 0; mask < (1 << len); ++mask) {
      std::vector<int> bits(len);
      for (int i = 0; i < len; ++i) bits[i] = (mask >> i) & 1;
      if (ValidPattern(bits, n, t)) out.push_back(std::move(bits));
    }
  }
  return out;
}

}  // namespace

std::vector<AuditScenario> ImprovedSvtBattery(int t, int max_exhaustive_k) {
  const std::vector<std::pair<TupleDataset, TupleDataset>> neighbours = {
      {{"a", "b"}, {"a", "b", "b"}},
      {{"a", "b", "b"}, {"b", "b"}},
      {{"a", "b"}, {"a", "a", "b"}},
      {{"a", "a", "b"}, {"a", "a"}},
      {{"a"}, {}},
  };
  std::vector<std::pair<TupleDataset, TupleDataset>> pairs;
  for (const auto& [x, y] : neighbours) {
    pairs.push_back({x, y});
    pairs.push_back({y, x});
  }
  auto name_of = [](const TupleDataset& d) {
    return absl::StrCat("{", absl::StrJoin(d, ","), "}");
  };

  std::vector<AuditScenario> out;
  auto add = [&](const std::vector<std::string>& stream,
                 const std::vector<int>& bits, double theta) {
    for (const auto& [d, dp] : pairs) {
      AuditScenario s;
      s.name = absl::StrCat(name_of(d), " vs ", name_of(dp), " stream ",
                            absl::StrJoin(stream, ""), " bits ",
                            absl::StrJoin(bits, ""), " theta ", theta);
      s.d = d;
      s.d_prime = dp;
      s.query_labels = stream;
      s.outputs = bits;
      s.theta = theta;
      out.push_back(std::move(s));
    }
  };

  for (int n = 1; n <= max_exhaustive_k; ++n) {
    const std::vector<std::vector<int>> patterns = ValidPatterns(n, t);
    for (int mask = 0; mask < (1 << n); ++mask) {
      std::vector<std::string> stream(n);
      for (int i = 0; i < n; ++i) stream[i] = (mask >> i) & 1 ? "b" : "a";
      for (const auto& bits : patterns) {
        for (double theta : {0.0, 1.0}) add(stream, bits, theta);
      }
    }
  }

  // Long streams from the binary and vanilla counterexamples.
  constexpr int kLong = 16;
  std::vector<std::vector<std::string>> streams(3);
  for (int i = 0; i < kLong; ++i) {
    streams[0].push_back(i < kLong / 2 ? "a" : "b");
    streams[1].push_back(i < kLong - 1 ? "a" : "b");
    streams[2].push_back(i < kLong / 2 ? "b" : "a");
  }
  for (const auto& stream : streams) {
    std::vector<std::vector<int>> patterns;
    // First half ones (cut at the t-th one), then zeros.
    std::vector<int> half;
    int ones = 0;
    for (int i = 0; i < kLong && ones < t; ++i) {
      const int bit = i < kLong / 2 ? 1 : 0;
      half.push_back(bit);
      ones += bit;
    }
    patterns.push_back(half);
    patterns.push_back(std::vector<int>(kLong, 0));
    for (int m : {kLong / 2, kLong - t}) {
      std::vector<int> bits(m, 0);
      bits.insert(bits.end(), t, 1);
      patterns.push_back(bits);
    }
    for (const auto& bits : patterns) {
      if (!ValidPattern(bits, kLong, t)) continue;
      for (double theta : {0.0, 1.0}) add(stream, bits, theta);
    }
  }
  return out;
}

std::string Verdict(double log_ratio, double bound) {
  return log_ratio <= bound + 1e-8 ? "SATISFIES" : "VIOLATES";
}

absl::StatusOr<AuditRecord> AuditBinary(int k, double theta, double lambda) {
  ASSIGN_OR_RETURN(const double r, BinarySvtLogRatio(k, theta, lambda));
  // D1 and D3 are two neighbour steps apart, so the claim at epsilon = 2 /
  // lambda allows 2 * epsilon.
  AuditRecord rec{"binary", k, lambda, theta, 1, r, 4 / lambda, ""};
  rec.verdict = Verdict(r, rec.claimed_bound);
  return rec;
}

absl::StatusOr<AuditRecord> AuditVanilla(int k, double lambda) {
  ASSIGN_OR_RETURN(const double r, VanillaSvtLogRatio(k, lambda));
  AuditRecord rec{"vanilla", k, lambda, 0.0, 1, r, 4 / lambda, ""};
  rec.verdict = Verdict(r, rec.claimed_bound);
  return rec;
}

absl::StatusOr<AuditRecord> AuditImproved(double lambda, int t,
                                          int max_exhaustive_k) {
  AuditRecord rec{"improved", 0, lambda, 0.0, t, -kInf, 2 / lambda, ""};
  for (const AuditScenario& s : ImprovedSvtBattery(t, max_exhaustive_k)) {
    ASSIGN_OR_RETURN(const double r, ImprovedSvtLogRatio(s, lambda, t));
    if (r > rec.log_ratio) {
      rec.log_ratio = r;
      rec.k = static_cast<int>(s.query_labels.size());
      rec.theta = s.theta;
    }
  }
  rec.verdict = Verdict(rec.log_ratio, rec.claimed_bound);
  return rec;
}

absl::StatusOr<std::vector<AuditRecord>> DefaultAudit() {
  std::vector<AuditRecord> out;
  ASSIGN_OR_RETURN(AuditRecord b, AuditBinary(16, 1.0, 2.0));
  out.push_back(std::move(b));
  ASSIGN_OR_RETURN(AuditRecord v, AuditVanilla(8, 2.0));
  out.push_back(std::move(v));
  for (double lambda : {1.0, 2.0, 4.0}) {
    for (int t : {1, 2, 3}) {
      ASSIGN_OR_RETURN(AuditRecord r, AuditImproved(lambda, t));
      out.push_back(std::move(r));
    }
  }
  return out;
}

nlohmann::json AuditToJson(const std::vector<AuditRecord>& records) {
  nlohmann::json scenarios = nlohmann::json::array();
  for (const AuditRecord& r : records) {
    scenarios.push_back({{"variant", r.variant},
                         {"k", r.k},
                         {"lambda", r.lambda},
                         {"theta", r.theta},
                         {"t", r.t},
                         {"log_ratio", r.log_ratio},
                         {"claimed_bound", r.claimed_bound},
                         {"verdict", r.verdict}});
  }
  return {{"scenarios", std::move(scenarios)}};
}

}  // namespace privtree
