#ifndef UOTKIT_IO_HPP
#define UOTKIT_IO_HPP

#include <iosfwd>
#include <string>
#include <vector>

#include "uotkit/barycenter.hpp"
#include "uotkit/duality.hpp"
#include "uotkit/report.hpp"

namespace uot::io {

// CSV with header `x,w` (lines starting with '#' are skipped) or JSON
// {"points": [...], "weights": [...]}, chosen by the .json extension.
// Throws std::runtime_error on I/O or parse failure.
DiscreteMeasure read_measure(const std::string& path);
DiscreteMeasure parse_measure_csv(std::istream& in);
DiscreteMeasure parse_measure_json(const std::string& text);

// Writes `# <line>` for each comment, then `x,w` rows.
void write_measure_csv(std::ostream& out, const DiscreteMeasure& m,
                       const std::vector<std::string>& comments = {});

// iter,delta_f,err_f,err_g,wall_ns
void write_sinkhorn_trace(std::ostream& out, const std::vector<IterRecord>& trace,
                          bool timing = true);
// iter,h0,fw_gap,pd_gap,wall_ns
void write_gap_trace(std::ostream& out, const std::vector<IterRecord>& trace, bool timing = true);

// i,j,mass
void write_plan_csv(std::ostream& out, const SparsePlan& plan);
// i1,...,iK,mass
void write_multiplan_csv(std::ostream& out, const MultiPlan& plan, std::size_t K);

// {"f": [...], "g": [...]}
DualPair read_potentials(const std::string& path);
void write_potentials(std::ostream& out, const DualPair& d);

// Shortest round-trip decimal form.
std::string format_double(double v);

void write_text_file(const std::string& path, const std::string& content);

}  // namespace uot::io

#endif  // UOTKIT_IO_HPP
