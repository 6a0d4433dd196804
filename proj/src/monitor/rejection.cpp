#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "pmon/monitor.hpp"

namespace pmon::monitor {

std::string_view to_string(ErrorKind k) {
  switch (k) {
    case ErrorKind::Any: return "any";
    case ErrorKind::FalsePositive: return "fp";
    case ErrorKind::FalseNegative: return "fn";
  }
  return "?";
}

ErrorKind parse_error_kind(std::string_view s) {
  if (s == "any") return ErrorKind::Any;
  if (s == "fp") return ErrorKind::FalsePositive;
  if (s == "fn") return ErrorKind::FalseNegative;
  throw std::invalid_argument("error kind must be any|fp|fn");
}

bool is_error(const Query& q, double truth, ErrorKind kind) {
  const bool pred_pos = q.classification ? q.label == 1 : q.prediction > 0.0;
  const bool true_pos = q.classification ? truth > 0.5 : truth > 0.0;
  switch (kind) {
    case ErrorKind::Any: return pred_pos != true_pos;
    case ErrorKind::FalsePositive: return pred_pos && !true_pos;
    case ErrorKind::FalseNegative: return !pred_pos && true_pos;
  }
  return false;
}

bool RejectionRule::rejects(const Query& q) const {
  if (classification) return q.uncertainty.confidence < min_confidence || q.uncertainty.credibility < min_credibility;
  return q.interval.width() > max_width;
}

namespace {

// Candidate thresholds for a "reject below t" rule: 0 (keep all), every
// observed value thinned to at most `cap` quantiles, and one past the maximum.
std::vector<double> below_thresholds(std::vector<double> v, std::size_t cap) {
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
  std::vector<double> out{0.0};
  if (v.size() <= cap) {
    out.insert(out.end(), v.begin(), v.end());
  } else {
    for (std::size_t k = 0; k < cap; ++k) out.push_back(v[k * (v.size() - 1) / (cap - 1)]);
  }
  if (!v.empty()) out.push_back(std::nextafter(v.back(), std::numeric_limits<double>::infinity()));
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

}  // namespace

RejectionRule fit_rejection_rule(const Monitor& m, const sat::Dataset& val, ErrorKind kind, std::uint64_t theta_seed) {
  if (val.size() == 0) throw std::invalid_argument("rejection rule needs a non-empty validation set");
  constexpr std::size_t kGrid = 64;
  std::vector<Query> qs;
  std::vector<char> err;
  const auto truth = val.scalar_labels();
  for (std::size_t i = 0; i < val.size(); ++i) {
    Rng theta(derive_seed(theta_seed, i));
    qs.push_back(m.query(val.inputs[i], &theta));
    err.push_back(is_error(qs.back(), truth[i], kind) ? 1 : 0);
  }

  RejectionRule best;
  best.classification = m.classification;
  best.error_kind = kind;
  std::size_t best_miss = std::numeric_limits<std::size_t>::max(), best_rej = 0;
  auto consider = [&](const RejectionRule& r) {
    std::size_t miss = 0, rej = 0;
    for (std::size_t i = 0; i < qs.size(); ++i) {
      const bool g = r.rejects(qs[i]);
      rej += g ? 1 : 0;
      miss += (g != (err[i] != 0)) ? 1 : 0;
    }
    if (miss < best_miss || (miss == best_miss && rej > best_rej)) {
      best = r;
      best_miss = miss;
      best_rej = rej;
    }
  };

  if (m.classification) {
    std::vector<double> conf, cred;
    for (const auto& q : qs) {
      conf.push_back(q.uncertainty.confidence);
      cred.push_back(q.uncertainty.credibility);
    }
    const auto cs = below_thresholds(conf, kGrid), ks = below_thresholds(cred, kGrid);
    for (double c : cs) {
      for (double k : ks) {
        RejectionRule r = best;
        r.min_confidence = c;
        r.min_credibility = k;
        consider(r);
      }
    }
  } else {
    std::vector<double> w;
    for (const auto& q : qs) w.push_back(q.interval.width());
    std::vector<double> cand = below_thresholds(w, kGrid);
    // reject-everything and reject-nothing ends
    cand.front() = std::nextafter(*std::min_element(w.begin(), w.end()), -std::numeric_limits<double>::infinity());
    cand.back() = std::numeric_limits<double>::infinity();
    for (double t : cand) {
      RejectionRule r = best;
      r.max_width = t;
      consider(r);
    }
  }
  best.detection_error = static_cast<double>(best_miss) / static_cast<double>(qs.size());
  return best;
}

}  // namespace pmon::monitor
