#pragma once

// CSV emitters. Numbers are written in shortest round-trip form, so equal
// results give equal bytes.

#include <ostream>
#include <string>
#include <vector>

#include "spgs/config.hpp"
#include "spgs/io.hpp"
#include "spgs/minimize.hpp"

namespace spgs {

inline constexpr const char* trace_header = "iter,I,G,A1,B,C,residual_l2,step";
inline constexpr const char* summary_header =
    "mode,L,n,staggered,kind,V1,lambda,alpha,width,p,step,tol,max_iters,seed,starts,c_estimate,residual_norm,"
    "iterations,status";

inline void write_trace_csv(std::ostream& os, const std::vector<TraceRow>& trace) {
  os << trace_header << '\n';
  for (const TraceRow& t : trace) {
    const auto& e = t.breakdown;
    os << t.iter << ',' << format_decimal(e.I) << ',' << format_decimal(e.G) << ',' << format_decimal(e.A1) << ','
       << format_decimal(e.B) << ',' << format_decimal(e.C) << ',' << format_decimal(t.residual_l2) << ','
       << format_decimal(t.step) << '\n';
  }
}

/// One summary row. `potential` overrides the config's potential echo (the
/// sweep runs constant potentials whatever the config says).
inline void write_summary_row(std::ostream& os, const RunConfig& c, const PotentialConfig& potential,
                              const GroundStateResult& r) {
  os << to_string(c.mode) << ',' << format_decimal(c.grid.L) << ',' << c.grid.n << ','
     << (c.grid.staggered ? 1 : 0) << ',' << potential.kind << ',' << format_decimal(potential.V1) << ','
     << format_decimal(potential.lambda) << ',' << potential.alpha << ',' << format_decimal(potential.width) << ','
     << format_decimal(c.solver.p) << ',' << format_decimal(c.solver.step) << ',' << format_decimal(c.solver.tol)
     << ',' << c.solver.max_iters << ',' << c.solver.seed << ',' << c.solver.starts << ','
     << format_decimal(r.c_estimate) << ',' << format_decimal(r.residual_norm) << ',' << r.iterations << ','
     << to_string(r.status) << '\n';
}

inline void write_annulus_csv(std::ostream& os, const std::vector<AnnulusShell>& profile) {
  os << "r,mass\n";
  for (const auto& s : profile) os << format_decimal(s.r) << ',' << format_decimal(s.mass) << '\n';
}

}  // namespace spgs
