#pragma once

#include "erc/lang/interp.hpp"

namespace erc::lang {

/// True when two traces resolved the same tests the same way: every record
/// of the shorter trace except its last matches the longer one position by
/// position (site and outcome). The last record is exempt because it is the
/// precision-dependent exit decision of the final loop.
inline bool choice_traces_coincide(const Trace& a, const Trace& b) {
  const auto& s = a.records.size() <= b.records.size() ? a.records : b.records;
  const auto& l = a.records.size() <= b.records.size() ? b.records : a.records;
  for (std::size_t i = 0; i + 1 < s.size(); ++i)
    if (s[i].kind != l[i].kind || s[i].site != l[i].site || s[i].picked != l[i].picked) return false;
  return true;
}

/// Exact equality of the recorded decisions, ignoring branch states.
inline bool same_choices(const Trace& a, const Trace& b) {
  if (a.records.size() != b.records.size()) return false;
  for (std::size_t i = 0; i < a.records.size(); ++i)
    if (a.records[i].site != b.records[i].site || a.records[i].picked != b.records[i].picked) return false;
  return true;
}

struct ConsistencyReport {
  EvalResult coarse;  // run at p
  EvalResult fine;    // run at p - 1
  bool traces_coincide = false;
  bool checked = false;  // distance bound was tested
  bool holds = true;     // |z - z'| <= 2^p + 2^(p-1), or not checked
  core::DyadicInterval distance;  // enclosure of |z - z'|

  std::string summary() const {
    if (!traces_coincide) return "choice traces differ; no assertion";
    return std::string(holds ? "consistent" : "INCONSISTENT") + ", |z - z'| in " + distance.to_string();
  }
};

/// Runs a REAL entry at p and at p - 1 under the same policy and, when the
/// choices coincide, checks that both results approximate one value.
inline ConsistencyReport eval_consistency_check(const Interpreter& interp, const std::string& entry,
                                                const std::vector<Value>& args, std::int64_t p,
                                                const EvalOptions& options = {}) {
  if (!interp.program().function(entry).takes_precision())
    throw std::invalid_argument("consistency check needs a REAL entry");
  ConsistencyReport r;
  r.coarse = interp.run(entry, args, p, options);
  r.fine = interp.run(entry, args, p - 1, options);
  r.traces_coincide = choice_traces_coincide(r.coarse.trace, r.fine.trace);
  if (!r.traces_coincide) return r;
  r.checked = true;
  core::Dyadic bound = core::Dyadic::pow2(p) + core::Dyadic::pow2(p - 1);
  auto diff = [&](const RealNum& z, const RealNum& w) {
    RealNum d = abs(z - w);
    core::DyadicInterval iv = d.approx(p - 8, options.budget);
    for (std::int64_t q = p - 16; iv.lo() <= bound && iv.hi() > bound && q >= p - 256; q -= 16)
      iv = d.approx(q, options.budget);
    return iv;
  };
  if (r.coarse.value.is<RealNum>()) {
    r.distance = diff(r.coarse.value.real(), r.fine.value.real());
    r.holds = r.distance.lo() <= bound;
  } else {
    const auto& a = r.coarse.value.as<RealArray>();
    const auto& b = r.fine.value.as<RealArray>();
    for (std::size_t i = 0; i < a.size(); ++i) {
      auto iv = diff(a[i], b[i]);
      if (i == 0 || iv.hi() > r.distance.hi()) r.distance = iv;
      r.holds = r.holds && iv.lo() <= bound;
    }
  }
  return r;
}

}  // namespace erc::lang
